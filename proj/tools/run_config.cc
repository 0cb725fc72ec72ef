// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.h"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "slosim/errors.h"

namespace slosim::cli {

using nlohmann::json;

namespace {

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

template <typename T>
void set_if(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = get<T>(j, key);
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const char* where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ConfigError(fmt::format("unknown key '{}' in {}", k, where));
  }
}

std::pair<std::int64_t, std::int64_t> bounds(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError(fmt::format("{} expects [lo, hi]", what));
  }
  return {v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
}

}  // namespace

LengthDist length_dist_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) {
    throw ConfigError("length distribution must be one of "
                      "{\"uniform\":[lo,hi]}, {\"log_uniform\":[lo,hi]}, {\"choice\":[...]}");
  }
  const auto& [kind, v] = *j.items().begin();
  try {
    if (kind == "uniform") {
      auto [lo, hi] = bounds(v, "uniform");
      return LengthDist::uniform(lo, hi);
    }
    if (kind == "log_uniform") {
      auto [lo, hi] = bounds(v, "log_uniform");
      return LengthDist::log_uniform(lo, hi);
    }
    if (kind == "choice") return LengthDist::choice(v.get<std::vector<std::int64_t>>());
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad {} distribution: {}", kind, e.what()));
  }
  throw ConfigError(fmt::format("unknown length distribution '{}'", kind));
}

ScaleDist scale_dist_from_json(const json& j) {
  try {
    if (j.is_array()) return ScaleDist::of(j.get<std::vector<double>>());
    if (j.is_object() && j.contains("range")) {
      const auto& r = j["range"];
      if (!r.is_array() || r.size() != 2) throw ConfigError("range expects [lo, hi]");
      return ScaleDist::range(r[0].get<double>(), r[1].get<double>());
    }
    if (j.is_number()) return ScaleDist::of({j.get<double>()});
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad scale distribution: {}", e.what()));
  }
  throw ConfigError("scale distribution must be a number, a list, or {\"range\":[lo,hi]}");
}

TraceConfig trace_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("trace config must be an object");
  reject_unknown(j,
                 {"num_requests", "arrival_rate", "long_fraction", "offline_fraction",
                  "prediction_noise", "long_prompt_threshold", "seed", "short_len",
                  "long_len", "output_len", "ttft_scale", "tbt_scale", "jct_scale"},
                 "trace config");
  TraceConfig c;
  set_if(j, "num_requests", c.num_requests);
  set_if(j, "arrival_rate", c.arrival_rate);
  set_if(j, "long_fraction", c.long_fraction);
  set_if(j, "offline_fraction", c.offline_fraction);
  set_if(j, "prediction_noise", c.prediction_noise);
  set_if(j, "long_prompt_threshold", c.long_prompt_threshold);
  set_if(j, "seed", c.seed);
  if (j.contains("short_len")) {
    const auto& s = j["short_len"];
    c.short_len_dists.clear();
    if (s.is_array()) {
      for (const auto& d : s) c.short_len_dists.push_back(length_dist_from_json(d));
    } else {
      c.short_len_dists.push_back(length_dist_from_json(s));
    }
  }
  if (j.contains("long_len")) c.long_len_dist = length_dist_from_json(j["long_len"]);
  if (j.contains("output_len")) c.output_len_dist = length_dist_from_json(j["output_len"]);
  if (j.contains("ttft_scale")) c.ttft_scale = scale_dist_from_json(j["ttft_scale"]);
  if (j.contains("tbt_scale")) c.tbt_scale = scale_dist_from_json(j["tbt_scale"]);
  if (j.contains("jct_scale")) c.jct_scale = scale_dist_from_json(j["jct_scale"]);
  return c;
}

PolicyConfig policy_config_from_json(const json& j) {
  PolicyConfig p;
  if (j.is_string()) {
    p.kind = parse_policy_kind(j.get<std::string>());
    return p;
  }
  if (!j.is_object()) throw ConfigError("policy must be a name or an object");
  reject_unknown(j,
                 {"kind", "label", "static_chunk_len", "gamma_s", "max_concurrent_long",
                  "era", "long_release", "budget_cap_tokens", "orca_batch_size",
                  "orca_max_seq", "urgency_slack"},
                 "policy");
  p.kind = parse_policy_kind(get<std::string>(j, "kind"));
  set_if(j, "label", p.label);
  set_if(j, "static_chunk_len", p.static_chunk_len);
  set_if(j, "gamma_s", p.gamma_s);
  set_if(j, "max_concurrent_long", p.max_concurrent_long);
  set_if(j, "era", p.era_enabled);
  set_if(j, "orca_batch_size", p.orca_batch_size);
  set_if(j, "orca_max_seq", p.orca_max_seq);
  set_if(j, "urgency_slack", p.urgency_slack);
  if (j.contains("budget_cap_tokens")) {
    const auto& v = j["budget_cap_tokens"];
    p.budget_cap_tokens = v.is_null() ? kNoBudgetCap : get<std::int64_t>(j, "budget_cap_tokens");
  }
  if (j.contains("long_release")) {
    const auto s = get<std::string>(j, "long_release");
    if (s == "prefill_done") {
      p.long_release = LongRelease::PrefillDone;
    } else if (s == "job_done") {
      p.long_release = LongRelease::JobDone;
    } else {
      throw ConfigError(fmt::format("long_release must be prefill_done or job_done, got '{}'", s));
    }
  }
  p.validate();
  return p;
}

EngineConfig engine_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("engine config must be an object");
  reject_unknown(j,
                 {"block_size", "swap_cost_per_token_s", "sched_overhead_s",
                  "goodput_window_s", "check_invariants"},
                 "engine config");
  EngineConfig e;
  set_if(j, "block_size", e.block_size);
  set_if(j, "swap_cost_per_token_s", e.swap_cost_per_token_s);
  set_if(j, "sched_overhead_s", e.sched_overhead_s);
  set_if(j, "goodput_window_s", e.goodput_window_s);
  set_if(j, "check_invariants", e.check_invariants);
  if (e.block_size <= 0) throw ConfigError("block_size must be positive");
  if (e.goodput_window_s <= 0) throw ConfigError("goodput_window_s must be positive");
  if (e.swap_cost_per_token_s < 0 || e.sched_overhead_s < 0) {
    throw ConfigError("time charges must be non-negative");
  }
  return e;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("run config must be an object");
  reject_unknown(j,
                 {"trace", "gen", "profile", "gpu", "policies", "out", "seed", "horizon",
                  "baseline", "engine", "jobs"},
                 "run config");
  RunConfig r;
  if (j.contains("trace")) r.trace_path = get<std::string>(j, "trace");
  if (j.contains("gen")) r.gen = trace_config_from_json(j["gen"]);
  if (j.contains("profile")) r.profile = get<std::string>(j, "profile");
  if (j.contains("gpu")) r.gpu = get<std::string>(j, "gpu");
  if (j.contains("policies")) {
    const auto& ps = j["policies"];
    if (!ps.is_array()) throw ConfigError("policies must be a list");
    for (const auto& p : ps) r.policies.push_back(policy_config_from_json(p));
  }
  if (j.contains("out")) r.out_dir = get<std::string>(j, "out");
  if (j.contains("seed")) r.seed = get<std::uint64_t>(j, "seed");
  if (j.contains("horizon")) r.horizon_s = get<double>(j, "horizon");
  set_if(j, "baseline", r.baseline);
  set_if(j, "jobs", r.jobs);
  if (j.contains("engine")) r.engine = engine_config_from_json(j["engine"]);
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

}  // namespace slosim::cli
