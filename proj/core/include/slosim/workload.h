// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slosim/cost_model.h"

namespace slosim {

using RequestId = std::int64_t;

enum class SloKind { Online, Offline };

// Online requests carry TTFT and per-token TBT targets; Offline requests
// carry a whole-job completion target. Never both.
struct SloSpec {
  SloKind kind = SloKind::Online;
  double ttft_s = 0.0;
  double tbt_s = 0.0;
  double jct_s = 0.0;

  static SloSpec online(double ttft_s, double tbt_s);
  static SloSpec offline(double jct_s);

  // Throws ValidationError naming the offending field.
  void validate() const;

  bool operator==(const SloSpec&) const = default;
};

inline constexpr std::int64_t kDefaultLongPromptThreshold = 4096;
inline constexpr double kReadingSpeedTbtS = 0.1875;

struct RequestSpec {
  RequestId id = 0;
  double arrival_s = 0.0;
  std::int64_t prompt_len = 1;
  std::int64_t output_len = 1;
  // What schedulers see; the engine terminates on output_len.
  std::int64_t predicted_output_len = 1;
  SloSpec slo;

  bool is_long(std::int64_t threshold = kDefaultLongPromptThreshold) const {
    return prompt_len >= threshold;
  }

  void validate() const;

  bool operator==(const RequestSpec&) const = default;
};

// Discrete length distribution. Uniform and LogUniform draw integers in
// [lo, hi]; Choice draws uniformly from values.
struct LengthDist {
  enum class Kind { Uniform, LogUniform, Choice };
  Kind kind = Kind::Uniform;
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  std::vector<std::int64_t> values;

  static LengthDist uniform(std::int64_t lo, std::int64_t hi);
  static LengthDist log_uniform(std::int64_t lo, std::int64_t hi);
  static LengthDist choice(std::vector<std::int64_t> values);

  void validate(const char* name) const;
};

// Multiplier source: a finite set when `set` is non-empty, otherwise a
// continuous interval [lo, hi].
struct ScaleDist {
  std::vector<double> set;
  double lo = 1.0;
  double hi = 1.0;

  static ScaleDist range(double lo, double hi) { return {{}, lo, hi}; }
  static ScaleDist of(std::vector<double> values) { return {std::move(values), 0, 0}; }

  void validate(const char* name) const;
};

struct TraceConfig {
  std::int64_t num_requests = 2000;
  double arrival_rate = 8.0;
  double long_fraction = 0.35;
  // Short prompts come from an equal-weight mixture of these.
  std::vector<LengthDist> short_len_dists = {LengthDist::uniform(10, 500),
                                             LengthDist::uniform(10, 2048)};
  LengthDist long_len_dist = LengthDist::log_uniform(4096, 100000);
  LengthDist output_len_dist = LengthDist::log_uniform(1, 2048);
  ScaleDist ttft_scale = ScaleDist::range(0.5, 1.5);
  ScaleDist tbt_scale = ScaleDist::range(0.75, 1.25);
  double offline_fraction = 0.0;
  // JCT target = jct_scale * (bucket prefill latency + output_len * 0.1875 s).
  ScaleDist jct_scale = ScaleDist::range(1.0, 2.0);
  // Multiplicative noise on predicted_output_len, uniform in [1-n, 1+n].
  double prediction_noise = 0.0;
  std::int64_t long_prompt_threshold = kDefaultLongPromptThreshold;
  std::uint64_t seed = 0;

  void validate() const;
};

// Unchunked prefill latency of the 512-token bucket containing prompt_len,
// evaluated at the bucket's upper edge.
double bucket_prefill_latency(std::int64_t prompt_len,
                              const ModelProfile& profile);

std::vector<RequestSpec> generate_trace(const TraceConfig& cfg,
                                        const ModelProfile& profile);

// JSONL trace I/O. Records are returned sorted by arrival (stable).
std::vector<RequestSpec> parse_trace(const std::string& text);
std::vector<RequestSpec> load_trace(const std::filesystem::path& path);
std::string dump_trace(const std::vector<RequestSpec>& trace);
void write_trace(const std::filesystem::path& path,
                 const std::vector<RequestSpec>& trace);

// FNV-1a over the canonical JSONL serialization, as 16 hex digits.
std::string trace_fingerprint(const std::vector<RequestSpec>& trace);

}  // namespace slosim
