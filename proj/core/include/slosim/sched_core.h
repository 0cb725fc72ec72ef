// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slosim/cost_model.h"
#include "slosim/kvc.h"
#include "slosim/workload.h"

namespace slosim {

enum class Phase {
  PromptPending,  // prompt tokens left to process (S_r >= 1)
  TgReady,        // resident, next step generates one token
  Preempted,      // swapped out; may still have prompt tokens left
};

// Per-iteration waiting allowance of an Offline request. Over- or
// under-use of the allowance carries forward as debt (negative = credit).
struct JctLedger {
  double per_iteration_allowance = 0.0;
  std::int64_t planned_iterations = 0;
  double debt = 0.0;
  double consumed_wait = 0.0;
  std::int64_t iterations = 0;

  double effective_allowance() const { return per_iteration_allowance - debt; }

  // Waiting time still owed to the request over its planned iterations.
  // consumed_wait + remaining_credit() == planned * allowance always.
  double remaining_credit() const {
    return static_cast<double>(planned_iterations - iterations) *
               per_iteration_allowance -
           debt;
  }
};

struct QueueEntry {
  RequestId id = 0;
  Phase phase = Phase::PromptPending;
  std::int64_t prompt_len = 1;
  std::int64_t remaining_prompt = 1;  // S_r
  std::int64_t seq_len = 0;           // prompt consumed + generated
  std::int64_t generated = 0;
  std::int64_t predicted_output_len = 1;
  double arrival_s = 0.0;
  double enqueue_time = 0.0;  // t_0
  std::uint64_t enqueue_seq = 0;
  SloSpec slo;
  bool is_long = false;
  std::optional<JctLedger> jct;

  bool prefill_done() const { return remaining_prompt == 0; }
  // Whether the next unit of work is a prompt chunk (as opposed to one
  // generation step).
  bool wants_prompt() const { return remaining_prompt > 0; }
};

struct ChunkStats {
  double avg_chunk_len = 768.0;  // L_c
  double t_max = 0.15;           // worst-case batch time
  double preempt_prob = 0.0;     // P
  double preempt_max = 0.0;      // P_max, seconds
  std::int64_t tg_steps = 0;
  std::int64_t preemptions = 0;

  static ChunkStats for_profile(const ModelProfile& profile);

  // Exponential moving average, weight 0.1 on the new sample.
  void observe_chunk(std::int64_t len);
  void observe_tg_step();
  void observe_preemption();
  void observe_preemption_duration(double seconds);
};

inline constexpr double kChunkEmaWeight = 0.1;
inline constexpr double kDefaultUrgencySlack = 0.1;

// ceil(S_r / L_c); a generation step counts as one chunk.
std::int64_t remaining_chunks(std::int64_t remaining_prompt,
                              const ChunkStats& stats);

// T_r = SLO - T_w - T_e for Online entries, where the SLO is the TTFT
// while prompt tokens remain and the TBT afterwards. Offline entries use
// their current effective allowance minus waiting time. Never clamped.
double remaining_time(const QueueEntry& entry, double now,
                      const ChunkStats& stats);

// N_ck*T_max + S_g*(T_max + P_max*P) over the full prompt.
double jct_initial_estimate(std::int64_t prompt_len,
                            std::int64_t predicted_output_len,
                            const ChunkStats& stats);

// (SLO_JCT - T_e) / (N_ck + S_g); negative when the target is infeasible.
double jct_allowance(double jct_slo, double estimate,
                     std::int64_t chunks, std::int64_t outputs);

// Builds the ledger of a fresh Offline request.
JctLedger open_jct_ledger(const RequestSpec& spec, const ChunkStats& stats);

// Charges one iteration's measured waiting time against the allowance.
void propagate_debt(JctLedger& ledger, double actual_wait);

// Iteration-level SLO that bounds batch time for this entry, if any.
std::optional<double> iteration_slo(const QueueEntry& entry);

bool is_urgent(double remaining, const ChunkStats& stats,
               double slack = kDefaultUrgencySlack);

// True for an Online prompt whose TTFT deadline has already gone by.
// Running it next can no longer meet that SLO, so it is not urgent.
bool ttft_lapsed(const QueueEntry& entry, double now);

// is_urgent, excluding lapsed prompts.
bool is_urgent(const QueueEntry& entry, double remaining, double now,
               const ChunkStats& stats, double slack = kDefaultUrgencySlack);

// Sorts ascending by remaining time, ties by enqueue order. Returns the
// remaining times aligned with the sorted queue.
std::vector<double> order_queue(std::vector<QueueEntry>& queue, double now,
                                const ChunkStats& stats);

// KV demand of running `tokens` more tokens of this entry. A non-first
// prompt chunk for a request the pool has never seen is a StateError.
KvcDemand entry_demand(const QueueEntry& entry, std::int64_t tokens,
                       const BlockPool& pool);

}  // namespace slosim
