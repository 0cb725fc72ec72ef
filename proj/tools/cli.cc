// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.h"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <ostream>
#include <set>

#include "run_config.h"
#include "slosim/errors.h"
#include "slosim/profile_io.h"
#include "slosim/report_io.h"

namespace slosim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

spdlog::logger& logger() {
  static auto log = [] {
    auto l = std::make_shared<spdlog::logger>(
        "slosim", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("SLOSIM_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return *log;
}

ModelProfile resolve_profile(const std::optional<std::string>& profile,
                             const std::optional<fs::path>& gpu) {
  if (!profile || *profile == "builtin:opt13b") {
    if (gpu) throw ConfigError("--gpu needs a --profile file to calibrate");
    return ModelProfile::opt13b();
  }
  if (*profile == "builtin:opt175b") return ModelProfile::opt175b();
  ProfileDocument doc = read_profile_document(*profile);
  if (gpu) doc = calibrate_profile(doc, read_profile_document(*gpu));
  return to_model_profile(doc);
}

std::string file_stem_for(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    if (!keep) c = '_';
  }
  return s;
}

// A baseline may be given as a display name or as any policy alias.
std::string resolve_baseline(const std::string& name, const std::set<std::string>& known) {
  if (known.count(name)) return name;
  try {
    std::string canon(to_string(parse_policy_kind(name)));
    if (known.count(canon)) return canon;
  } catch (const ConfigError&) {
  }
  throw ConfigError(fmt::format("baseline '{}' is not among the policies", name));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
  }
}

std::string trace_summary(const std::vector<RequestSpec>& trace,
                          std::int64_t long_threshold) {
  std::int64_t longs = 0;
  std::int64_t offline = 0;
  for (const auto& r : trace) {
    longs += r.is_long(long_threshold) ? 1 : 0;
    offline += r.slo.kind == SloKind::Offline ? 1 : 0;
  }
  const double n = static_cast<double>(trace.size());
  const double span = trace.empty() ? 0.0 : trace.back().arrival_s;
  return fmt::format("requests={} long_fraction={:.3f} offline_fraction={:.3f} rate={:.3f}/s\n",
                     trace.size(), n > 0 ? longs / n : 0.0, n > 0 ? offline / n : 0.0,
                     span > 0 ? n / span : 0.0);
}

// --- gen ------------------------------------------------------------------

struct GenArgs {
  std::string config;
  std::string out;
  std::optional<std::string> profile;
  std::optional<std::int64_t> requests;
  std::optional<double> rate;
  std::optional<double> long_fraction;
  std::optional<double> offline_fraction;
  std::optional<std::uint64_t> seed;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  TraceConfig cfg;
  if (!a.config.empty()) cfg = trace_config_from_json(read_json_file(a.config));
  if (a.requests) cfg.num_requests = *a.requests;
  if (a.rate) cfg.arrival_rate = *a.rate;
  if (a.long_fraction) cfg.long_fraction = *a.long_fraction;
  if (a.offline_fraction) cfg.offline_fraction = *a.offline_fraction;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  const auto profile = resolve_profile(a.profile, std::nullopt);
  const auto trace = generate_trace(cfg, profile);
  write_trace(a.out, trace);
  out << trace_summary(trace, cfg.long_prompt_threshold);
  return kExitOk;
}

// --- run ------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::optional<std::string> trace;
  std::optional<std::string> gen;
  std::vector<std::string> policies;
  std::optional<std::string> profile;
  std::optional<std::string> gpu;
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<std::string> out;
  std::optional<std::string> baseline;
  std::optional<int> jobs;
};

RunConfig merge(const RunArgs& a) {
  RunConfig rc;
  if (!a.config.empty()) rc = run_config_from_json(read_json_file(a.config));
  if (a.trace) {
    rc.trace_path = *a.trace;
    rc.gen.reset();
  }
  if (a.gen) {
    rc.gen = trace_config_from_json(read_json_file(*a.gen));
    rc.trace_path.reset();
  }
  if (!a.policies.empty()) {
    rc.policies.clear();
    for (const auto& p : a.policies) {
      PolicyConfig pc;
      pc.kind = parse_policy_kind(p);
      rc.policies.push_back(pc);
    }
  }
  if (a.profile) rc.profile = *a.profile;
  if (a.gpu) rc.gpu = *a.gpu;
  if (a.seed) rc.seed = *a.seed;
  if (a.horizon) rc.horizon_s = *a.horizon;
  if (a.out) rc.out_dir = *a.out;
  if (a.baseline) rc.baseline = *a.baseline;
  if (a.jobs) rc.jobs = *a.jobs;

  if (rc.trace_path && rc.gen) throw ConfigError("give either a trace file or a generator config");
  if (rc.policies.empty()) throw ConfigError("at least one policy is required");
  if (rc.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (rc.horizon_s && !(*rc.horizon_s > 0)) throw ConfigError("horizon must be positive");
  std::set<std::string> names;
  for (const auto& p : rc.policies) {
    p.validate();
    if (!names.insert(p.display_name()).second) {
      throw ConfigError(fmt::format("duplicate policy name '{}'; set a label", p.display_name()));
    }
  }
  if (!rc.baseline.empty()) rc.baseline = resolve_baseline(rc.baseline, names);
  return rc;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  RunConfig rc = merge(a);
  const ModelProfile profile = resolve_profile(rc.profile, rc.gpu);

  std::vector<RequestSpec> trace;
  if (rc.trace_path) {
    trace = load_trace(*rc.trace_path);
  } else {
    TraceConfig tc = rc.gen.value_or(TraceConfig{});
    if (rc.seed) tc.seed = *rc.seed;
    tc.validate();
    trace = generate_trace(tc, profile);
  }
  ensure_dir(rc.out_dir);

  EngineConfig ec = rc.engine;
  if (rc.horizon_s) ec.horizon_s = *rc.horizon_s;

  logger().info("{} requests, {} policies, {} jobs", trace.size(), rc.policies.size(), rc.jobs);
  std::vector<MetricsReport> reports(rc.policies.size());
  const std::size_t jobs = static_cast<std::size_t>(rc.jobs);
  for (std::size_t lo = 0; lo < rc.policies.size(); lo += jobs) {
    const std::size_t hi = std::min(rc.policies.size(), lo + jobs);
    std::vector<std::future<MetricsReport>> running;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto launch = jobs > 1 ? std::launch::async : std::launch::deferred;
      running.push_back(std::async(launch, [&, i] {
        return run_simulation(trace, rc.policies[i], profile, ec);
      }));
    }
    for (std::size_t i = lo; i < hi; ++i) {
      reports[i] = running[i - lo].get();
      logger().info("{}: {} iterations, makespan {:.3f}s{}", reports[i].policy,
                    reports[i].iterations, reports[i].makespan_s,
                    reports[i].truncated ? " (truncated)" : "");
    }
  }

  for (const auto& r : reports) {
    write_text_file(rc.out_dir / (file_stem_for(r.policy) + ".json"),
                    report_to_json(r).dump(2) + "\n");
  }
  const std::string csv = reports_to_csv(reports);
  write_text_file(rc.out_dir / "report.csv", csv);
  out << csv;

  if (!rc.baseline.empty() && reports.size() >= 2) {
    const Comparison cmp = compare_reports(reports, rc.baseline);
    write_text_file(rc.out_dir / "comparison.json", comparison_to_json(cmp).dump(2) + "\n");
    out << '\n' << format_comparison(cmp);
  }
  return kExitOk;
}

// --- compare --------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> reports;
  std::string baseline;
  std::optional<std::string> out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::vector<MetricsReport> all;
  for (const auto& p : a.reports) {
    auto some = read_reports(p);
    all.insert(all.end(), some.begin(), some.end());
  }
  std::set<std::string> names;
  for (const auto& r : all) names.insert(r.policy);
  const Comparison cmp = compare_reports(all, resolve_baseline(a.baseline, names));
  out << format_comparison(cmp);
  if (a.out) write_text_file(*a.out, comparison_to_json(cmp).dump(2) + "\n");
  return kExitOk;
}

// --- calibrate ------------------------------------------------------------

struct CalibrateArgs {
  std::string profile;
  std::optional<std::string> gpu;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  const ProfileDocument model = read_profile_document(a.profile);
  const ProfileDocument gpu = a.gpu ? read_profile_document(*a.gpu) : ProfileDocument{};
  const ProfileDocument done = calibrate_profile(model, gpu);
  to_model_profile(done).validate();
  write_profile_document(a.out, done);
  out << fmt::format("pivot_forward_size={} pivot_time_s={:.6f}\n", *done.pivot_forward_size,
                     *done.pivot_time_s);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"slosim: SLO-aware LLM serving scheduler simulator"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic JSONL trace");
  g->add_option("--out", gen.out, "Output trace path")->required();
  g->add_option("--gen,--config", gen.config, "Trace generator config (JSON)");
  g->add_option("--profile", gen.profile, "Model profile used for SLO scaling");
  g->add_option("--requests", gen.requests, "Number of requests");
  g->add_option("--rate", gen.rate, "Poisson arrival rate (req/s)");
  g->add_option("--long-fraction", gen.long_fraction, "Share of long prompts");
  g->add_option("--offline-fraction", gen.offline_fraction, "Share of JCT-SLO requests");
  g->add_option("--seed", gen.seed, "RNG seed");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Simulate one trace under one or more policies");
  r->add_option("--config", run.config, "Run config (JSON)");
  r->add_option("--trace", run.trace, "JSONL trace to replay");
  r->add_option("--gen", run.gen, "Trace generator config (JSON)");
  r->add_option("--policy", run.policies, "Policy name; repeatable")->take_all();
  r->add_option("--profile", run.profile, "Model profile (path or builtin:<name>)");
  r->add_option("--gpu", run.gpu, "GPU profile used to calibrate the model profile");
  r->add_option("--seed", run.seed, "Generator seed");
  r->add_option("--horizon", run.horizon, "Stop after this much simulated time (s)");
  r->add_option("--out", run.out, "Output directory");
  r->add_option("--baseline", run.baseline, "Also compare against this policy");
  r->add_option("--jobs", run.jobs, "Policies simulated concurrently");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Ratios of report metrics against a baseline");
  c->add_option("reports", cmp.reports, "Report JSON files")->required();
  c->add_option("--baseline", cmp.baseline, "Baseline policy name")->required();
  c->add_option("--out", cmp.out, "Write the comparison as JSON");

  CalibrateArgs cal;
  auto* k = app.add_subcommand("calibrate", "Fill in pivot size and time from GPU throughput");
  k->add_option("--profile", cal.profile, "Model profile")->required();
  k->add_option("--gpu", cal.gpu, "GPU profile");
  k->add_option("--out", cal.out, "Output profile path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*r) return cmd_run(run, out);
    if (*c) return cmd_compare(cmp, out);
    if (*k) return cmd_calibrate(cal, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const slosim::ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal fault: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitConfig;
}

}  // namespace slosim::cli
