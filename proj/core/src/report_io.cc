// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/report_io.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "slosim/errors.h"

namespace slosim {

namespace {

using nlohmann::json;

std::string num(double v) { return fmt::format("{:.6f}", v); }

struct MetricAccess {
  const char* name;
  double (*get)(const MetricsReport&);
};

// Metrics compared across policies, in table order.
const MetricAccess kCompared[] = {
    {"tokens_per_s", [](const MetricsReport& r) { return r.tokens_per_s; }},
    {"reqs_per_s", [](const MetricsReport& r) { return r.reqs_per_s; }},
    {"goodput", [](const MetricsReport& r) { return r.goodput; }},
    {"slo_attainment", [](const MetricsReport& r) { return r.slo_attainment; }},
    {"jct_slo_attainment", [](const MetricsReport& r) { return r.jct_slo_attainment; }},
    {"jct_mean", [](const MetricsReport& r) { return r.jct_mean; }},
    {"jct_p5", [](const MetricsReport& r) { return r.jct_p5; }},
    {"jct_p95", [](const MetricsReport& r) { return r.jct_p95; }},
    {"gpu_util_mean", [](const MetricsReport& r) { return r.gpu_util_mean; }},
    {"kvc_util_mean", [](const MetricsReport& r) { return r.kvc_util_mean; }},
    {"preemptions", [](const MetricsReport& r) { return static_cast<double>(r.preemptions); }},
};

double ratio(double value, double base) {
  if (base == 0.0) {
    return value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return value / base;
}

}  // namespace

const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols = {
      "policy",         "tokens_per_s",  "reqs_per_s", "goodput",
      "slo_attainment", "jct_slo_attainment", "jct_mean", "jct_p5",
      "jct_p95",        "gpu_util_mean", "kvc_util_mean", "preemptions",
      "truncated"};
  return cols;
}

std::string report_csv_header() {
  return fmt::format("{}\n", fmt::join(report_csv_columns(), ","));
}

std::string report_csv_row(const MetricsReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.policy,
                     num(r.tokens_per_s), num(r.reqs_per_s), num(r.goodput),
                     num(r.slo_attainment), num(r.jct_slo_attainment),
                     num(r.jct_mean), num(r.jct_p5), num(r.jct_p95),
                     num(r.gpu_util_mean), num(r.kvc_util_mean), r.preemptions,
                     r.truncated ? "true" : "false");
}

std::string reports_to_csv(const std::vector<MetricsReport>& reps) {
  std::string out = report_csv_header();
  for (const auto& r : reps) out += report_csv_row(r);
  return out;
}

json report_to_json(const MetricsReport& r) {
  return json{{"policy", r.policy},
              {"trace_id", r.trace_id},
              {"requests", r.requests},
              {"completed", r.completed},
              {"rejected", r.rejected},
              {"iterations", r.iterations},
              {"makespan_s", r.makespan_s},
              {"tokens_per_s", r.tokens_per_s},
              {"reqs_per_s", r.reqs_per_s},
              {"goodput", r.goodput},
              {"goodput_whole", r.goodput_whole},
              {"slo_attainment", r.slo_attainment},
              {"jct_slo_attainment", r.jct_slo_attainment},
              {"jct_mean", r.jct_mean},
              {"jct_p5", r.jct_p5},
              {"jct_p95", r.jct_p95},
              {"gpu_util_mean", r.gpu_util_mean},
              {"kvc_util_mean", r.kvc_util_mean},
              {"preemptions", r.preemptions},
              {"truncated", r.truncated}};
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  try {
    r.policy = j.at("policy").get<std::string>();
    r.trace_id = j.value("trace_id", std::string{});
    r.requests = j.value("requests", std::int64_t{0});
    r.completed = j.value("completed", std::int64_t{0});
    r.rejected = j.value("rejected", std::int64_t{0});
    r.iterations = j.value("iterations", std::int64_t{0});
    r.makespan_s = j.value("makespan_s", 0.0);
    r.tokens_per_s = j.at("tokens_per_s").get<double>();
    r.reqs_per_s = j.at("reqs_per_s").get<double>();
    r.goodput = j.at("goodput").get<double>();
    r.goodput_whole = j.value("goodput_whole", 0.0);
    r.slo_attainment = j.at("slo_attainment").get<double>();
    r.jct_slo_attainment = j.at("jct_slo_attainment").get<double>();
    r.jct_mean = j.at("jct_mean").get<double>();
    r.jct_p5 = j.at("jct_p5").get<double>();
    r.jct_p95 = j.at("jct_p95").get<double>();
    r.gpu_util_mean = j.at("gpu_util_mean").get<double>();
    r.kvc_util_mean = j.at("kvc_util_mean").get<double>();
    r.preemptions = j.at("preemptions").get<std::int64_t>();
    r.truncated = j.at("truncated").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("malformed report: {}", e.what()), 0);
  }
  return r;
}

std::vector<MetricsReport> read_reports(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open report '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("report '{}' is not JSON: {}", path.string(), e.what()), 0);
  }
  if (j.is_object() && j.contains("reports")) j = j["reports"];
  std::vector<MetricsReport> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(report_from_json(item));
  } else {
    out.push_back(report_from_json(j));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

Comparison compare_reports(const std::vector<MetricsReport>& reps,
                           const std::string& baseline) {
  if (reps.size() < 2) throw ConfigError("comparison needs at least two reports");
  const MetricsReport* base = nullptr;
  for (const auto& r : reps) {
    if (r.policy == baseline) {
      base = &r;
      break;
    }
  }
  if (!base) throw ConfigError(fmt::format("baseline '{}' not among reports", baseline));
  for (const auto& r : reps) {
    if (r.trace_id != base->trace_id) {
      throw ValidationError(
          fmt::format("report '{}' ran trace {} but baseline ran {}", r.policy,
                      r.trace_id, base->trace_id),
          "trace_id");
    }
  }
  Comparison cmp;
  cmp.baseline = baseline;
  for (const auto& m : kCompared) cmp.metrics.emplace_back(m.name);
  for (const auto& r : reps) {
    if (&r != base) cmp.policies.push_back(r.policy);
  }
  for (const auto& m : kCompared) {
    std::vector<double> row;
    for (const auto& r : reps) {
      if (&r != base) row.push_back(ratio(m.get(r), m.get(*base)));
    }
    cmp.ratios.push_back(std::move(row));
  }
  return cmp;
}

std::string format_comparison(const Comparison& cmp) {
  std::string out = fmt::format("{:<20}", fmt::format("vs {}", cmp.baseline));
  for (const auto& p : cmp.policies) out += fmt::format(" {:>14}", p);
  out += '\n';
  for (std::size_t m = 0; m < cmp.metrics.size(); ++m) {
    out += fmt::format("{:<20}", cmp.metrics[m]);
    for (double v : cmp.ratios[m]) out += fmt::format(" {:>14.3f}", v);
    out += '\n';
  }
  return out;
}

json comparison_to_json(const Comparison& cmp) {
  json ratios = json::object();
  for (std::size_t m = 0; m < cmp.metrics.size(); ++m) {
    json row = json::object();
    for (std::size_t p = 0; p < cmp.policies.size(); ++p) {
      const double v = cmp.ratios[m][p];
      row[cmp.policies[p]] = std::isfinite(v) ? json(v) : json(nullptr);
    }
    ratios[cmp.metrics[m]] = std::move(row);
  }
  return json{{"baseline", cmp.baseline}, {"ratios", std::move(ratios)}};
}

}  // namespace slosim
