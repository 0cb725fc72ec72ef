// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "slosim/metrics.h"

namespace slosim {
namespace {

RequestSpec spec(RequestId id, double arrival, std::int64_t prompt, std::int64_t output,
                 SloSpec slo) {
  RequestSpec r;
  r.id = id;
  r.arrival_s = arrival;
  r.prompt_len = prompt;
  r.output_len = output;
  r.predicted_output_len = output;
  r.slo = slo;
  return r;
}

// Values below were worked out by hand from the event table.
TEST(Metrics, HandComputedReport) {
  MetricsAccumulator acc;
  acc.on_arrival(spec(0, 0.0, 10, 3, SloSpec::online(0.5, 0.2)));
  acc.on_arrival(spec(1, 0.2, 20, 2, SloSpec::online(1.0, 0.3)));
  acc.on_arrival(spec(2, 0.5, 5, 1, SloSpec::offline(1.0)));
  acc.on_arrival(spec(3, 1.0, 4, 2, SloSpec::online(0.1, 0.2)));

  acc.on_chunk(0, 10);
  acc.on_token(0, 0.4);
  acc.on_token(0, 0.55);
  acc.on_preempt(0);
  acc.on_token(0, 0.9);  // 0.35 s gap, over the 0.2 s TBT
  acc.on_complete(0, 0.9);

  acc.on_chunk(1, 12);
  acc.on_chunk(1, 8);
  acc.on_token(1, 0.7);
  acc.on_token(1, 0.95);
  acc.on_complete(1, 0.95);

  acc.on_chunk(2, 5);
  acc.on_token(2, 1.2);
  acc.on_complete(2, 1.2);

  acc.on_chunk(3, 4);
  acc.on_token(3, 1.5);  // late first token, never finishes

  acc.on_iteration(IterationRecord{0.0, 0.1, 100, 200, 64, 128, 0});
  acc.on_iteration(IterationRecord{0.1, 0.1, 0, 200, 64, 128, 0});
  acc.on_iteration(IterationRecord{0.1, 0.4, 300, 300, 32, 128, 1});
  acc.set_end(2.0, false);

  const auto rep = compute_metrics(acc, 1.0);
  EXPECT_EQ(rep.requests, 4);
  EXPECT_EQ(rep.completed, 3);
  EXPECT_EQ(rep.iterations, 3);
  EXPECT_DOUBLE_EQ(rep.makespan_s, 2.0);
  EXPECT_DOUBLE_EQ(rep.tokens_per_s, 23.0);
  EXPECT_DOUBLE_EQ(rep.reqs_per_s, 1.5);
  EXPECT_DOUBLE_EQ(rep.goodput, 1.0);
  EXPECT_DOUBLE_EQ(rep.goodput_whole, 1.0);
  EXPECT_DOUBLE_EQ(rep.slo_attainment, 4.0 / 7.0);
  EXPECT_DOUBLE_EQ(rep.jct_slo_attainment, 1.0);
  EXPECT_NEAR(rep.jct_mean, (0.9 + 0.75 + 0.7) / 3.0, 1e-12);
  EXPECT_NEAR(rep.jct_p5, 0.705, 1e-12);
  EXPECT_NEAR(rep.jct_p95, 0.885, 1e-12);
  EXPECT_DOUBLE_EQ(rep.gpu_util_mean, 0.75);
  EXPECT_DOUBLE_EQ(rep.kvc_util_mean, 0.375);
  EXPECT_EQ(rep.preemptions, 1);
  EXPECT_FALSE(rep.truncated);
}

TEST(Metrics, AllDeadlinesMet) {
  MetricsAccumulator acc;
  for (int i = 0; i < 4; ++i) {
    acc.on_arrival(spec(i, 0.5 * i, 8, 2, SloSpec::online(1.0, 1.0)));
    acc.on_chunk(i, 8);
    acc.on_token(i, 0.5 * i + 0.1);
    acc.on_token(i, 0.5 * i + 0.2);
    acc.on_complete(i, 0.5 * i + 0.2);
  }
  acc.set_end(1.7, false);
  const auto rep = compute_metrics(acc, 1.0);
  EXPECT_DOUBLE_EQ(rep.slo_attainment, 1.0);
  EXPECT_NEAR(rep.goodput_whole * rep.makespan_s, 4.0, 1e-12);
}

TEST(Metrics, MissedTbtCountsForThroughputOnly) {
  MetricsAccumulator acc;
  acc.on_arrival(spec(0, 0.0, 8, 2, SloSpec::online(1.0, 0.1)));
  acc.on_chunk(0, 8);
  acc.on_token(0, 0.2);
  acc.on_token(0, 0.5);
  acc.on_complete(0, 0.5);
  acc.set_end(1.0, false);
  const auto rep = compute_metrics(acc, 1.0);
  EXPECT_DOUBLE_EQ(rep.reqs_per_s, 1.0);
  EXPECT_DOUBLE_EQ(rep.goodput, 0.0);
  EXPECT_FALSE(is_good(acc.request(0)));
}

TEST(Percentile, Interpolates) {
  EXPECT_DOUBLE_EQ(percentile({}, 50.0), 0.0);
  EXPECT_DOUBLE_EQ(percentile({3.0, 1.0, 2.0}, 50.0), 2.0);
  EXPECT_DOUBLE_EQ(percentile({0.0, 10.0}, 25.0), 2.5);
}

}  // namespace
}  // namespace slosim
