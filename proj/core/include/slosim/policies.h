// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "slosim/cost_model.h"
#include "slosim/kvc.h"
#include "slosim/sched_core.h"

namespace slosim {

enum class PolicyKind { OrcaFcfs, PagedFcfs, StaticChunk, AccelGen };

std::string_view to_string(PolicyKind kind);
// Accepts the canonical names, case-insensitively. ConfigError otherwise.
PolicyKind parse_policy_kind(std::string_view name);

// When a long prompt stops counting against the concurrent-long limit.
enum class LongRelease { PrefillDone, JobDone };

inline constexpr std::int64_t kNoBudgetCap = std::numeric_limits<std::int64_t>::max() / 4;

struct PolicyConfig {
  PolicyKind kind = PolicyKind::AccelGen;
  std::int64_t static_chunk_len = 512;
  double gamma_s = 0.75;
  std::int64_t max_concurrent_long = 1;
  bool era_enabled = true;
  LongRelease long_release = LongRelease::PrefillDone;
  // 0 means "the profile's pivot forward size"; kNoBudgetCap disables it.
  std::int64_t budget_cap_tokens = 0;
  std::int64_t orca_batch_size = 8;
  std::int64_t orca_max_seq = 8192;
  double urgency_slack = kDefaultUrgencySlack;
  // Optional display name; defaults to the policy kind.
  std::string label;

  void validate() const;
  std::string display_name() const;
  std::int64_t resolved_cap(const ModelProfile& profile) const;
};

struct Selection {
  RequestId id = 0;
  std::int64_t chunk_len = 0;
  bool is_prompt = false;
  bool is_final_chunk = false;
  // Whole-sequence capacity to pin before running (0 = none).
  std::int64_t reserve_tokens = 0;

  bool operator==(const Selection&) const = default;
};

struct BatchPlan {
  std::vector<Selection> selections;
  std::int64_t forward_size = 0;  // S_f
  std::int64_t token_budget = 0;  // S_b
  double slo_min = std::numeric_limits<double>::infinity();
  // Requests swapped out of the KV cache before this batch runs.
  std::vector<RequestId> preempted;
  // Urgent requests dropped from the batch without a swap.
  std::vector<RequestId> deferred;
  std::vector<RequestId> urgent;

  bool empty() const { return selections.empty(); }
};

// Everything a planner may look at. The queue is ordered by
// order_queue and `remaining` is aligned with it.
struct PlanningView {
  std::span<const QueueEntry> queue;
  std::span<const double> remaining;
  const BlockPool* pool = nullptr;
  const ChunkStats* stats = nullptr;
  const ModelProfile* profile = nullptr;
  // Long prompts currently holding a concurrent-long slot.
  const std::unordered_set<RequestId>* active_long = nullptr;
  double now = 0.0;
};

// min(floor(S_pf * (slo_min - T_0) / T_pf), cap), at least 1. With the
// default T_0 = 0 this is S_pf * slo_min / T_pf.
std::int64_t token_budget(double slo_min, const ModelProfile& profile,
                          std::int64_t cap);

// Length of the next slice of a prompt given the room left in the batch.
inline std::int64_t dynamic_chunk(std::int64_t prompt_remainder,
                                  std::int64_t room) {
  return room <= 0 ? 0 : (prompt_remainder < room ? prompt_remainder : room);
}

// Only the last token of the final prompt chunk (or a generation step)
// yields a new output token.
inline bool emit_token_on_final_chunk(const Selection& s) {
  return !s.is_prompt || s.is_final_chunk;
}

// A unit of work competing for GPU tokens (D_c) and KV tokens (D_m).
// Fixed candidates have a set demand. Chunkable candidates are re-sliced
// at every pick to the largest chunk fitting both budgets.
struct Candidate {
  std::size_t key = 0;
  std::int64_t tokens = 0;
  std::int64_t memory = 0;     // fixed candidates: D_m in tokens
  bool chunkable = false;
  std::int64_t headroom = 0;   // chunkable: KV slots usable without new blocks
  std::int64_t restore = 0;    // chunkable: swapped tokens to bring back
  bool new_long = false;       // would take a concurrent-long slot
};

struct Pick {
  std::size_t key = 0;
  std::int64_t compute = 0;
  std::int64_t memory = 0;

  bool operator==(const Pick&) const = default;
};

// Largest chunk of a chunkable candidate fitting avail_compute GPU tokens
// and avail_memory KV tokens, with its memory demand. nullopt if < 1.
std::optional<Pick> fit_candidate(const Candidate& c, std::int64_t avail_compute,
                                  std::int64_t avail_memory,
                                  std::int64_t block_size);

// Repeatedly takes the feasible candidate whose (D_c, D_m) is nearest in
// Euclidean distance to the remaining (A_c, A_m), ties by key. At most
// long_slots candidates flagged new_long are taken.
std::vector<Pick> select_requests(std::int64_t avail_compute,
                                  std::int64_t avail_memory,
                                  std::vector<Candidate> candidates,
                                  std::int64_t block_size,
                                  std::int64_t long_slots);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual BatchPlan plan(const PlanningView& view) = 0;
  const PolicyConfig& config() const { return cfg_; }

 protected:
  explicit Policy(PolicyConfig cfg) : cfg_(std::move(cfg)) {}
  PolicyConfig cfg_;
};

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg);

// Recomputes S_f and the final-chunk flags, orders selections by queue
// position and checks the plan invariants. Throws InvariantViolation.
void finalize_plan(BatchPlan& plan, const PlanningView& view);

}  // namespace slosim
