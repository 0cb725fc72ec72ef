// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "slosim/sched_core.h"

namespace slosim {
namespace {

ChunkStats stats_with(double l_c, double t_max) {
  ChunkStats s;
  s.avg_chunk_len = l_c;
  s.t_max = t_max;
  return s;
}

QueueEntry tg_entry(RequestId id, double tbt, double enqueued) {
  QueueEntry e;
  e.id = id;
  e.phase = Phase::TgReady;
  e.prompt_len = 16;
  e.remaining_prompt = 0;
  e.seq_len = 17;
  e.generated = 1;
  e.enqueue_time = enqueued;
  e.slo = SloSpec::online(1.0, tbt);
  return e;
}

TEST(RemainingChunks, Cases) {
  const auto s = stats_with(512.0, 0.1);
  EXPECT_EQ(remaining_chunks(0, s), 1);
  EXPECT_EQ(remaining_chunks(1537, s), 4);
  EXPECT_EQ(remaining_chunks(512, s), 1);
}

TEST(RemainingTime, GenerationStep) {
  const auto s = stats_with(512.0, 0.1);
  const auto e = tg_entry(1, 0.1875, 0.95);
  EXPECT_NEAR(remaining_time(e, 1.0, s), 0.0375, 1e-12);
  // Just returned to the queue: nothing waited yet.
  EXPECT_DOUBLE_EQ(remaining_time(e, 0.95, s), 0.1875 - 0.1);
  EXPECT_LT(remaining_time(e, 5.0, s), 0.0);
}

TEST(RemainingTime, PromptCountsFromArrival) {
  const auto s = stats_with(512.0, 0.1);
  QueueEntry e;
  e.prompt_len = 2000;
  e.remaining_prompt = 1000;
  e.arrival_s = 1.0;
  e.enqueue_time = 2.0;
  e.slo = SloSpec::online(3.0, 0.2);
  EXPECT_NEAR(remaining_time(e, 2.5, s), 3.0 - 1.5 - 2 * 0.1, 1e-12);
}

TEST(JctEstimate, WithPreemption) {
  auto s = stats_with(512.0, 0.08);
  s.preempt_max = 1.0;
  s.preempt_prob = 0.1;
  EXPECT_NEAR(jct_initial_estimate(2048, 10, s), 2.12, 1e-12);
  s.preempt_prob = 0.0;
  EXPECT_NEAR(jct_initial_estimate(2048, 10, s), 4 * 0.08 + 10 * 0.08, 1e-12);
}

TEST(JctAllowance, Cases) {
  EXPECT_NEAR(jct_allowance(3.12, 2.12, 4, 10), 1.0 / 14.0, 1e-12);
  EXPECT_DOUBLE_EQ(jct_allowance(2.0, 2.0, 4, 10), 0.0);
}

TEST(JctLedger, OpenFromSpec) {
  const auto s = stats_with(512.0, 0.08);
  RequestSpec r;
  r.prompt_len = 2048;
  r.output_len = 10;
  r.predicted_output_len = 10;
  r.slo = SloSpec::offline(3.0);
  const auto ledger = open_jct_ledger(r, s);
  EXPECT_EQ(ledger.planned_iterations, 14);
  EXPECT_NEAR(ledger.per_iteration_allowance,
              (r.slo.jct_s - (4 * 0.08 + 10 * 0.08)) / 14.0, 1e-12);
}

TEST(DebtPropagation, OverAndUnderWait) {
  JctLedger l;
  l.per_iteration_allowance = 0.5;
  l.planned_iterations = 4;
  propagate_debt(l, 0.5 + 0.2);
  EXPECT_NEAR(l.effective_allowance(), 0.5 - 0.2, 1e-12);
  const double before = l.debt;
  propagate_debt(l, 0.5);
  EXPECT_DOUBLE_EQ(l.debt, before);
  propagate_debt(l, 0.5 - 0.2);
  EXPECT_NEAR(l.debt, 0.0, 1e-12);
  EXPECT_NEAR(l.consumed_wait + l.remaining_credit(), 4 * 0.5, 1e-12);
}

TEST(Urgency, Boundaries) {
  const auto s = stats_with(512.0, 0.1);
  EXPECT_TRUE(is_urgent(0.1, s));
  EXPECT_FALSE(is_urgent(1.0, s));
  EXPECT_TRUE(is_urgent(-0.3, s));
  EXPECT_TRUE(is_urgent(0.1 * 1.1, s));
  EXPECT_FALSE(is_urgent(0.1 * 1.1 + 1e-9, s));
}

TEST(Urgency, LapsedPromptIsNotUrgent) {
  const auto s = stats_with(512.0, 0.1);
  QueueEntry e;
  e.prompt_len = 100;
  e.remaining_prompt = 100;
  e.arrival_s = 0.0;
  e.slo = SloSpec::online(0.5, 0.2);
  EXPECT_TRUE(is_urgent(e, remaining_time(e, 0.45, s), 0.45, s));
  EXPECT_FALSE(is_urgent(e, remaining_time(e, 0.6, s), 0.6, s));
  // Late generation steps stay urgent.
  const auto g = tg_entry(2, 0.2, 0.0);
  EXPECT_TRUE(is_urgent(g, remaining_time(g, 3.0, s), 3.0, s));
}

TEST(IterationSlo, ByPhaseAndKind) {
  QueueEntry e;
  e.remaining_prompt = 5;
  e.slo = SloSpec::online(0.7, 0.2);
  EXPECT_EQ(iteration_slo(e), 0.7);
  e.remaining_prompt = 0;
  EXPECT_EQ(iteration_slo(e), 0.2);
  e.slo = SloSpec::offline(9.0);
  EXPECT_FALSE(iteration_slo(e).has_value());
}

TEST(OrderQueue, SmallSortAndStableTies) {
  const auto s = stats_with(512.0, 0.1);
  std::vector<QueueEntry> q;
  const double tbts[] = {0.4, 0.2, 0.3, 0.3};
  for (int i = 0; i < 4; ++i) {
    q.push_back(tg_entry(i, tbts[i], 0.0));
    q.back().enqueue_seq = static_cast<std::uint64_t>(i);
  }
  const auto rt = order_queue(q, 0.0, s);
  std::vector<RequestId> ids;
  for (const auto& e : q) ids.push_back(e.id);
  EXPECT_EQ(ids, (std::vector<RequestId>{1, 2, 3, 0}));
  EXPECT_TRUE(std::is_sorted(rt.begin(), rt.end()));
}

TEST(OrderQueue, MatchesComparisonSortOracle) {
  const auto s = stats_with(400.0, 0.12);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<QueueEntry> q;
  for (int i = 0; i < 50; ++i) {
    QueueEntry e;
    e.id = 100 + i;
    e.enqueue_seq = static_cast<std::uint64_t>(i);
    e.prompt_len = 1 + static_cast<std::int64_t>(u(rng) * 3000);
    e.remaining_prompt = (i % 3 == 0) ? 0 : e.prompt_len;
    e.arrival_s = u(rng) * 2.0;
    e.enqueue_time = e.arrival_s + u(rng);
    // Coarse SLO grid forces ties.
    e.slo = SloSpec::online(0.5 * (1 + i % 4), 0.25 * (1 + i % 2));
    if (e.remaining_prompt == 0) e.enqueue_time = 1.0;
    q.push_back(e);
  }
  const double now = 4.0;
  std::vector<std::pair<double, RequestId>> oracle;
  for (const auto& e : q) {
    double t;
    if (e.remaining_prompt > 0) {
      t = e.slo.ttft_s - (now - e.arrival_s) -
          std::ceil(static_cast<double>(e.remaining_prompt) / 400.0) * 0.12;
    } else {
      t = e.slo.tbt_s - (now - e.enqueue_time) - 0.12;
    }
    oracle.emplace_back(t, e.id);
  }
  std::stable_sort(oracle.begin(), oracle.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto rt = order_queue(q, now, s);
  ASSERT_EQ(q.size(), oracle.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_EQ(q[i].id, oracle[i].second) << "position " << i;
    EXPECT_NEAR(rt[i], oracle[i].first, 1e-12);
  }
}

TEST(ChunkStats, MovingAverageAndPreemptionRate) {
  auto s = stats_with(768.0, 0.15);
  s.observe_chunk(268);
  EXPECT_DOUBLE_EQ(s.avg_chunk_len, 768.0 + 0.1 * (268.0 - 768.0));
  s.observe_tg_step();
  s.observe_tg_step();
  s.observe_preemption();
  EXPECT_DOUBLE_EQ(s.preempt_prob, 0.5);
  s.observe_preemption_duration(0.3);
  s.observe_preemption_duration(0.1);
  EXPECT_DOUBLE_EQ(s.preempt_max, 0.3);
}

}  // namespace
}  // namespace slosim
