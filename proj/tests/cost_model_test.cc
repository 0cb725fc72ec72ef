// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "slosim/cost_model.h"
#include "slosim/errors.h"

namespace slosim {
namespace {

TEST(CostModel, FclOps) {
  EXPECT_EQ(fcl_ops(0, 7), 0);
  EXPECT_EQ(fcl_ops(1, 1), 24);
  EXPECT_EQ(fcl_ops(2, 3), 24 * 2 * 9);
}

TEST(CostModel, AttentionOps) {
  EXPECT_EQ(attention_ops(0, 5), 0);
  EXPECT_EQ(attention_ops(1, 1), 4);
  EXPECT_EQ(attention_ops(3, 2), 72);
}

TEST(CostModel, LayerOps) {
  EXPECT_EQ(layer_ops(6, 1), 288);
  EXPECT_EQ(layer_ops(60, 10), 2 * fcl_ops(60, 10));
  const double ratio = static_cast<double>(attention_ops(6, 100)) /
                       static_cast<double>(layer_ops(6, 100));
  EXPECT_DOUBLE_EQ(ratio, 1.0 / 101.0);
}

TEST(CostModel, KvcBytesPerToken) {
  ModelProfile p;
  p.num_layers = 2;
  p.hidden_size = 3;
  p.bytes_per_element = 2;
  EXPECT_EQ(kvc_bytes_per_token(p), 24);
  p.num_layers = 1;
  p.hidden_size = 1;
  p.bytes_per_element = 1;
  EXPECT_EQ(kvc_bytes_per_token(p), 2);
}

TEST(CostModel, IterationTime) {
  ModelProfile p;
  p.pivot_forward_size = 768;
  p.pivot_time_s = 0.08;
  EXPECT_DOUBLE_EQ(iteration_time(384, p), 0.04);
  EXPECT_DOUBLE_EQ(iteration_time(768, p), 0.08);
  EXPECT_DOUBLE_EQ(iteration_time(0, p), 0.0);
  p.fixed_overhead_s = 0.01;
  EXPECT_DOUBLE_EQ(iteration_time(0, p), 0.01);
  EXPECT_DOUBLE_EQ(iteration_time(768, p), 0.09);
}

TEST(CostModel, PivotFromThroughput) {
  EXPECT_EQ(pivot_from_throughput(768.0 * 5.0e9, 5.0e9, 1.0), 768);
  EXPECT_EQ(pivot_from_throughput(1e12, 1.3e9, 1.0), 769);
  EXPECT_EQ(pivot_from_throughput(1e12, 1.3e9, 0.9), 692);
  EXPECT_THROW(pivot_from_throughput(1e12, 0.0, 1.0), ConfigError);
  EXPECT_THROW(pivot_from_throughput(0.0, 1.3e9, 1.0), ConfigError);
}

TEST(CostModel, DerivePivotUsesModelShape) {
  GpuProfile gpu;
  ModelProfile shape;
  shape.hidden_size = 64;
  shape.num_layers = 2;
  const auto x = static_cast<double>(per_token_ops(shape));
  gpu.peak_flops = 100.0 * x;
  EXPECT_EQ(derive_pivot(64, 2, gpu), 100);
  const double t = derive_pivot_time(64, 2, 100, gpu);
  EXPECT_DOUBLE_EQ(t, static_cast<double>(layer_ops(100, 64) * 2) / gpu.peak_flops);
}

TEST(CostModel, BuiltinProfiles) {
  EXPECT_EQ(ModelProfile::opt13b().pivot_forward_size, 768);
  EXPECT_EQ(ModelProfile::opt175b().pivot_forward_size, 1280);
  EXPECT_NO_THROW(ModelProfile::opt13b().validate());
}

}  // namespace
}  // namespace slosim
