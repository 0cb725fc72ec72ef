// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.h"
#include "slosim/cost_model.h"
#include "slosim/profile_io.h"
#include "slosim/report_io.h"

namespace slosim {
namespace {

namespace fs = std::filesystem;
using namespace cli;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("slosim_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static void spit(const std::string& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST_F(CliTest, GenIsReproducible) {
  ASSERT_EQ(cli({"gen", "--requests", "1000", "--seed", "7", "--out", path("a.jsonl")}), kExitOk);
  EXPECT_NE(out_.str().find("requests=1000"), std::string::npos);
  ASSERT_EQ(cli({"gen", "--requests", "1000", "--seed", "7", "--out", path("b.jsonl")}), kExitOk);
  const auto a = slurp(path("a.jsonl"));
  EXPECT_EQ(count_lines(a), 1000u);
  EXPECT_EQ(a, slurp(path("b.jsonl")));
}

TEST_F(CliTest, GenRejectsZeroRate) {
  EXPECT_EQ(cli({"gen", "--rate", "0", "--out", path("a.jsonl")}), kExitConfig);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(CliTest, GenUnwritablePathIsIoError) {
  EXPECT_EQ(cli({"gen", "--requests", "5", "--out", path("missing/dir/a.jsonl")}), kExitIo);
}

TEST_F(CliTest, RunTwoPoliciesIsDeterministic) {
  ASSERT_EQ(cli({"gen", "--requests", "80", "--seed", "3", "--out", path("t.jsonl")}), kExitOk);
  ASSERT_EQ(cli({"run", "--trace", path("t.jsonl"), "--policy", "PagedFcfs", "--policy",
                 "AccelGen", "--out", path("o1")}),
            kExitOk);
  const auto csv = slurp(path("o1/report.csv"));
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_EQ(csv.substr(0, csv.find('\n') + 1), report_csv_header());
  EXPECT_TRUE(fs::exists(path("o1/AccelGen.json")));
  ASSERT_EQ(cli({"run", "--trace", path("t.jsonl"), "--policy", "PagedFcfs", "--policy",
                 "AccelGen", "--out", path("o2")}),
            kExitOk);
  EXPECT_EQ(csv, slurp(path("o2/report.csv")));
}

TEST_F(CliTest, RunMissingProfileIsIoError) {
  EXPECT_EQ(cli({"run", "--policy", "AccelGen", "--profile", path("nope.json"), "--out",
                 path("o")}),
            kExitIo);
}

TEST_F(CliTest, RunUnknownPolicyIsConfigError) {
  EXPECT_EQ(cli({"run", "--policy", "fastserve", "--out", path("o")}), kExitConfig);
}

TEST_F(CliTest, RunWithBaselineWritesComparison) {
  spit(path("gen.json"), R"({"num_requests": 40, "seed": 2})");
  ASSERT_EQ(cli({"run", "--gen", path("gen.json"), "--policy", "paged_fcfs", "accelgen",
                 "--baseline", "paged_fcfs", "--out", path("o")}),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(path("o/comparison.json")));
  EXPECT_EQ(j.at("baseline"), "PagedFcfs");
  EXPECT_TRUE(j.at("ratios").at("goodput").contains("AccelGen"));
}

MetricsReport report(const std::string& policy, double goodput) {
  MetricsReport r;
  r.policy = policy;
  r.trace_id = "00000000deadbeef";
  r.goodput = goodput;
  r.tokens_per_s = 100.0;
  r.slo_attainment = 0.5;
  return r;
}

TEST_F(CliTest, CompareRatio) {
  spit(path("a.json"), report_to_json(report("AccelGen", 2.0)).dump());
  spit(path("p.json"), report_to_json(report("PagedFcfs", 1.0)).dump());
  ASSERT_EQ(cli({"compare", path("a.json"), path("p.json"), "--baseline", "PagedFcfs", "--out",
                 path("cmp.json")}),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(path("cmp.json")));
  EXPECT_DOUBLE_EQ(j["ratios"]["goodput"]["AccelGen"].get<double>(), 2.0);
}

TEST_F(CliTest, CompareIdenticalReports) {
  spit(path("a.json"), report_to_json(report("AccelGen", 1.5)).dump());
  spit(path("p.json"), report_to_json(report("PagedFcfs", 1.5)).dump());
  ASSERT_EQ(cli({"compare", path("a.json"), path("p.json"), "--baseline", "PagedFcfs", "--out",
                 path("cmp.json")}),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(path("cmp.json")));
  for (const auto& [metric, row] : j["ratios"].items()) {
    EXPECT_DOUBLE_EQ(row["AccelGen"].get<double>(), 1.0) << metric;
  }
}

TEST_F(CliTest, CompareThreePolicies) {
  nlohmann::json arr = nlohmann::json::array();
  arr.push_back(report_to_json(report("AccelGen", 2.0)));
  arr.push_back(report_to_json(report("StaticChunk", 1.0)));
  arr.push_back(report_to_json(report("PagedFcfs", 1.0)));
  spit(path("all.json"), arr.dump());
  ASSERT_EQ(cli({"compare", path("all.json"), "--baseline", "PagedFcfs", "--out",
                 path("cmp.json")}),
            kExitOk);
  const auto j = nlohmann::json::parse(slurp(path("cmp.json")));
  EXPECT_EQ(j["ratios"]["goodput"].size(), 2u);
  const auto table = out_.str();
  const auto header = table.substr(0, table.find('\n'));
  EXPECT_NE(header.find("AccelGen"), std::string::npos);
  EXPECT_NE(header.find("StaticChunk"), std::string::npos);
  std::istringstream words(header);
  std::vector<std::string> cols{std::istream_iterator<std::string>(words), {}};
  EXPECT_EQ(cols, (std::vector<std::string>{"vs", "PagedFcfs", "AccelGen", "StaticChunk"}));
}

TEST_F(CliTest, CompareRefusesMixedTraces) {
  auto other = report("PagedFcfs", 1.0);
  other.trace_id = "1111111111111111";
  spit(path("a.json"), report_to_json(report("AccelGen", 2.0)).dump());
  spit(path("p.json"), report_to_json(other).dump());
  EXPECT_EQ(cli({"compare", path("a.json"), path("p.json"), "--baseline", "PagedFcfs"}),
            kExitConfig);
}

TEST_F(CliTest, CalibrateCompleteProfileUnchanged) {
  ProfileDocument doc;
  doc.hidden_size = 5120;
  doc.num_layers = 40;
  doc.pivot_forward_size = 768;
  doc.pivot_time_s = 0.15;
  doc.kvc_capacity_tokens = 131072;
  write_profile_document(path("m.json"), doc);
  ASSERT_EQ(cli({"calibrate", "--profile", path("m.json"), "--out", path("c.json")}), kExitOk);
  EXPECT_EQ(read_profile_document(path("c.json")), doc);
  ASSERT_EQ(cli({"calibrate", "--profile", path("c.json"), "--out", path("c2.json")}), kExitOk);
  EXPECT_EQ(slurp(path("c.json")), slurp(path("c2.json")));
}

TEST_F(CliTest, CalibrateDerivesPivot) {
  spit(path("m.json"), R"({"hidden_size": 5120, "num_layers": 40, "kvc_capacity_tokens": 131072})");
  spit(path("g.json"), R"({"peak_flops": 1e15, "saturation_efficiency": 0.9})");
  ASSERT_EQ(cli({"calibrate", "--profile", path("m.json"), "--gpu", path("g.json"), "--out",
                 path("c.json")}),
            kExitOk);
  const auto doc = read_profile_document(path("c.json"));
  ModelProfile shape;
  const double x = static_cast<double>(per_token_ops(shape));
  const auto want = static_cast<std::int64_t>(0.9 * 1e15 / x);
  EXPECT_EQ(*doc.pivot_forward_size, want);
  EXPECT_GT(*doc.pivot_time_s, 0.0);
}

TEST_F(CliTest, CalibrateMissingThroughput) {
  spit(path("m.json"), R"({"hidden_size": 5120, "num_layers": 40})");
  EXPECT_EQ(cli({"calibrate", "--profile", path("m.json"), "--out", path("c.json")}),
            kExitConfig);
  EXPECT_NE(err_.str().find("peak_flops"), std::string::npos);
}

TEST_F(CliTest, HelpExitsZero) { EXPECT_EQ(cli({"--help"}), kExitOk); }

}  // namespace
}  // namespace slosim
