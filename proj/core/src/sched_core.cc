// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/sched_core.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slosim/errors.h"

namespace slosim {

ChunkStats ChunkStats::for_profile(const ModelProfile& profile) {
  ChunkStats s;
  s.avg_chunk_len = static_cast<double>(profile.pivot_forward_size);
  s.t_max = iteration_time(profile.pivot_forward_size, profile);
  return s;
}

void ChunkStats::observe_chunk(std::int64_t len) {
  avg_chunk_len += kChunkEmaWeight * (static_cast<double>(len) - avg_chunk_len);
  avg_chunk_len = std::max(avg_chunk_len, 1.0);
}

void ChunkStats::observe_tg_step() {
  ++tg_steps;
  preempt_prob = std::min(1.0, static_cast<double>(preemptions) /
                                   static_cast<double>(tg_steps));
}

void ChunkStats::observe_preemption() {
  ++preemptions;
  if (tg_steps > 0) {
    preempt_prob = std::min(1.0, static_cast<double>(preemptions) /
                                     static_cast<double>(tg_steps));
  }
}

void ChunkStats::observe_preemption_duration(double seconds) {
  preempt_max = std::max(preempt_max, seconds);
}

std::int64_t remaining_chunks(std::int64_t remaining_prompt,
                              const ChunkStats& stats) {
  if (remaining_prompt <= 0) return 1;
  return static_cast<std::int64_t>(
      std::ceil(static_cast<double>(remaining_prompt) / stats.avg_chunk_len));
}

double remaining_time(const QueueEntry& entry, double now,
                      const ChunkStats& stats) {
  const double waited = now - entry.enqueue_time;
  if (entry.slo.kind == SloKind::Offline) {
    const double allowance = entry.jct ? entry.jct->effective_allowance() : 0.0;
    return allowance - waited;
  }
  const double exec = static_cast<double>(remaining_chunks(entry.remaining_prompt, stats)) *
                      stats.t_max;
  if (entry.wants_prompt()) {
    // TTFT runs from arrival no matter how many chunks were already taken.
    return entry.slo.ttft_s - (now - entry.arrival_s) - exec;
  }
  return entry.slo.tbt_s - waited - exec;
}

double jct_initial_estimate(std::int64_t prompt_len,
                            std::int64_t predicted_output_len,
                            const ChunkStats& stats) {
  const auto chunks = static_cast<double>(remaining_chunks(prompt_len, stats));
  return chunks * stats.t_max +
         static_cast<double>(predicted_output_len) *
             (stats.t_max + stats.preempt_max * stats.preempt_prob);
}

double jct_allowance(double jct_slo, double estimate, std::int64_t chunks,
                     std::int64_t outputs) {
  return (jct_slo - estimate) / static_cast<double>(chunks + outputs);
}

JctLedger open_jct_ledger(const RequestSpec& spec, const ChunkStats& stats) {
  JctLedger ledger;
  const std::int64_t chunks = remaining_chunks(spec.prompt_len, stats);
  const double estimate =
      jct_initial_estimate(spec.prompt_len, spec.predicted_output_len, stats);
  ledger.per_iteration_allowance =
      jct_allowance(spec.slo.jct_s, estimate, chunks, spec.predicted_output_len);
  ledger.planned_iterations = chunks + spec.predicted_output_len;
  return ledger;
}

void propagate_debt(JctLedger& ledger, double actual_wait) {
  ledger.debt += actual_wait - ledger.per_iteration_allowance;
  ledger.consumed_wait += actual_wait;
  ++ledger.iterations;
}

std::optional<double> iteration_slo(const QueueEntry& entry) {
  if (entry.slo.kind == SloKind::Offline) return std::nullopt;
  return entry.wants_prompt() ? entry.slo.ttft_s : entry.slo.tbt_s;
}

bool is_urgent(double remaining, const ChunkStats& stats, double slack) {
  return remaining <= stats.t_max * (1.0 + slack);
}

bool ttft_lapsed(const QueueEntry& entry, double now) {
  return entry.slo.kind == SloKind::Online && entry.wants_prompt() &&
         now - entry.arrival_s > entry.slo.ttft_s;
}

bool is_urgent(const QueueEntry& entry, double remaining, double now,
               const ChunkStats& stats, double slack) {
  return !ttft_lapsed(entry, now) && is_urgent(remaining, stats, slack);
}

std::vector<double> order_queue(std::vector<QueueEntry>& queue, double now,
                                const ChunkStats& stats) {
  const std::size_t n = queue.size();
  std::vector<double> rt(n);
  for (std::size_t i = 0; i < n; ++i) rt[i] = remaining_time(queue[i], now, stats);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (rt[a] != rt[b]) return rt[a] < rt[b];
    return queue[a].enqueue_seq < queue[b].enqueue_seq;
  });
  std::vector<QueueEntry> sorted;
  sorted.reserve(n);
  std::vector<double> sorted_rt;
  sorted_rt.reserve(n);
  for (auto i : idx) {
    sorted.push_back(std::move(queue[i]));
    sorted_rt.push_back(rt[i]);
  }
  queue = std::move(sorted);
  return sorted_rt;
}

KvcDemand entry_demand(const QueueEntry& entry, std::int64_t tokens,
                       const BlockPool& pool) {
  const bool started = entry.remaining_prompt < entry.prompt_len;
  if (started && !pool.knows(entry.id)) {
    throw StateError(fmt::format(
        "request {} has processed tokens but no KV cache state", entry.id));
  }
  return pool.demand(entry.id, tokens);
}

}  // namespace slosim
