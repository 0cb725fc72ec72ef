// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "slosim/cost_model.h"
#include "slosim/kvc.h"
#include "slosim/metrics.h"
#include "slosim/policies.h"
#include "slosim/sched_core.h"
#include "slosim/workload.h"

namespace slosim {

struct EngineConfig {
  std::int64_t block_size = kDefaultBlockSize;
  double horizon_s = std::numeric_limits<double>::infinity();
  double swap_cost_per_token_s = 0.0;
  double sched_overhead_s = 0.0;
  double goodput_window_s = 1.0;
  // Re-verify pool accounting after every step (slow; for tests).
  bool check_invariants = false;
};

// What a planning step saw and did. Handed to the step observer after the
// plan has been applied and the iteration has run.
struct StepTrace {
  double start_s = 0.0;
  double end_s = 0.0;
  std::span<const QueueEntry> queue;   // ordered, as planned against
  std::span<const double> remaining;   // aligned with queue
  const BatchPlan* plan = nullptr;
  // Long prompts holding a concurrent-long slot after the step.
  const std::unordered_set<RequestId>* active_long = nullptr;
  // Requests that produced an output token this step.
  std::span<const RequestId> emitted;
  // Offline requests whose wait was charged this step: (id, allowance granted).
  std::span<const std::pair<RequestId, double>> allowances;
};

// Discrete-event loop: one planning call and one batched forward pass per
// step. Single-threaded and deterministic.
class Engine {
 public:
  Engine(std::vector<RequestSpec> trace, std::unique_ptr<Policy> policy,
         ModelProfile profile, EngineConfig cfg = {});

  // Advances one step. Returns false once nothing is left to do (or the
  // horizon was reached).
  bool step();

  // Steps until done and returns the finalized report.
  MetricsReport run();

  void set_observer(std::function<void(const StepTrace&)> fn) {
    observer_ = std::move(fn);
  }

  double clock() const { return clock_; }
  const BlockPool& pool() const { return pool_; }
  const ChunkStats& stats() const { return stats_; }
  const MetricsAccumulator& metrics() const { return metrics_; }
  const std::vector<QueueEntry>& waiting() const { return queue_; }
  const std::unordered_set<RequestId>& active_long() const { return active_long_; }
  std::int64_t live() const { return static_cast<std::int64_t>(queue_.size()); }
  std::int64_t pending_arrivals() const {
    return static_cast<std::int64_t>(trace_.size() - next_arrival_);
  }
  bool truncated() const { return truncated_; }
  // Ledgers of Offline requests, kept after completion.
  const std::vector<std::pair<RequestId, JctLedger>>& closed_ledgers() const {
    return closed_ledgers_;
  }

 private:
  void admit_arrivals();
  void apply(const BatchPlan& plan, std::vector<RequestId>& emitted,
             std::vector<std::pair<RequestId, double>>& allowances);

  std::vector<RequestSpec> trace_;
  std::size_t next_arrival_ = 0;
  std::unique_ptr<Policy> policy_;
  ModelProfile profile_;
  EngineConfig cfg_;
  BlockPool pool_;
  ChunkStats stats_;
  MetricsAccumulator metrics_;
  std::vector<QueueEntry> queue_;
  std::vector<double> remaining_;
  std::unordered_set<RequestId> active_long_;
  std::unordered_map<RequestId, double> preempted_at_;
  std::unordered_map<RequestId, std::int64_t> output_len_;
  std::int64_t idle_plans_ = 0;
  std::vector<std::pair<RequestId, JctLedger>> closed_ledgers_;
  std::function<void(const StepTrace&)> observer_;
  double clock_ = 0.0;
  std::uint64_t enqueue_seq_ = 0;
  bool truncated_ = false;
  bool done_ = false;
};

// Runs a trace under one policy. The report carries the policy display
// name and the trace fingerprint.
MetricsReport run_simulation(const std::vector<RequestSpec>& trace,
                             const PolicyConfig& policy,
                             const ModelProfile& profile,
                             const EngineConfig& cfg = {});

}  // namespace slosim
