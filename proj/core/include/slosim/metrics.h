// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "slosim/workload.h"

namespace slosim {

struct RequestRecord {
  RequestId id = 0;
  SloSpec slo;
  double arrival_s = 0.0;
  std::int64_t prompt_len = 0;
  std::int64_t output_len = 0;
  std::vector<std::int64_t> chunks;  // prompt slices in processing order
  std::vector<double> emissions;     // one timestamp per output token
  std::optional<double> completion_s;
  std::int64_t preemptions = 0;
  bool rejected = false;

  std::optional<double> first_token_s() const {
    if (emissions.empty()) return std::nullopt;
    return emissions.front();
  }
  bool completed() const { return completion_s.has_value(); }
};

struct IterationRecord {
  double start_s = 0.0;
  double end_s = 0.0;
  std::int64_t forward_size = 0;
  std::int64_t token_budget = 0;
  std::int64_t allocated_tokens = 0;
  std::int64_t total_tokens = 0;
  std::int64_t preemptions = 0;
};

class MetricsAccumulator {
 public:
  void on_arrival(const RequestSpec& spec);
  void on_reject(RequestId id);
  void on_chunk(RequestId id, std::int64_t len);
  // Emission times must be strictly increasing per request.
  void on_token(RequestId id, double t);
  void on_complete(RequestId id, double t);
  void on_preempt(RequestId id);
  void on_iteration(const IterationRecord& rec);
  void set_end(double t, bool truncated) {
    end_s_ = t;
    truncated_ = truncated;
  }

  const std::vector<RequestRecord>& requests() const { return requests_; }
  const std::vector<IterationRecord>& iterations() const { return iterations_; }
  const RequestRecord& request(RequestId id) const;
  double end_s() const { return end_s_; }
  bool truncated() const { return truncated_; }

 private:
  RequestRecord& mutable_request(RequestId id);

  std::vector<RequestRecord> requests_;
  std::unordered_map<RequestId, std::size_t> index_;
  std::vector<IterationRecord> iterations_;
  double end_s_ = 0.0;
  bool truncated_ = false;
};

struct MetricsReport {
  std::string policy;
  std::string trace_id;
  std::int64_t requests = 0;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
  std::int64_t iterations = 0;
  double makespan_s = 0.0;
  double tokens_per_s = 0.0;
  double reqs_per_s = 0.0;
  double goodput = 0.0;        // mean over fixed windows
  double goodput_whole = 0.0;  // good completions / makespan
  double slo_attainment = 0.0;
  double jct_slo_attainment = 0.0;
  double jct_mean = 0.0;
  double jct_p5 = 0.0;
  double jct_p95 = 0.0;
  double gpu_util_mean = 0.0;
  double kvc_util_mean = 0.0;
  std::int64_t preemptions = 0;
  bool truncated = false;

  bool operator==(const MetricsReport&) const = default;
};

// Whether every token event of a request met its iteration-level target:
// TTFT from arrival for the first token, TBT between consecutive tokens.
// Missing events (unfinished or rejected requests) count as misses.
struct TokenSloTally {
  std::int64_t met = 0;
  std::int64_t total = 0;
};
TokenSloTally token_slo_tally(const RequestRecord& r);

// Completed, and every iteration-level target met (Online) or the JCT
// target met (Offline).
bool is_good(const RequestRecord& r);

// Linear-interpolated percentile, p in [0, 100]. Empty input gives 0.
double percentile(std::vector<double> values, double p);

MetricsReport compute_metrics(const MetricsAccumulator& acc, double window_s = 1.0);

}  // namespace slosim
