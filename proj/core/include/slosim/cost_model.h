// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace slosim {

// Operation counts are exact integers; the largest supported inputs
// (forward size 1e6, hidden size 8192) stay far below 2^63.
using Flops = std::int64_t;

// Transformer shape plus the calibrated throughput pivot.
struct ModelProfile {
  std::int64_t hidden_size = 5120;
  std::int64_t num_layers = 40;
  std::int64_t pivot_forward_size = 768;
  double pivot_time_s = 0.15;
  std::int64_t bytes_per_element = 2;
  double fixed_overhead_s = 0.0;
  std::int64_t kvc_capacity_tokens = 131072;

  void validate() const;

  // Single-GPU 13B-class model, pivot 768 tokens.
  static ModelProfile opt13b();
  // Eight-GPU 175B-class model, pivot 1280 tokens.
  static ModelProfile opt175b();
};

struct GpuProfile {
  double peak_flops = 312e12;
  double saturation_efficiency = 1.0;
  std::int64_t kvc_capacity_tokens = 131072;

  void validate() const;
};

// Total fully-connected work of one transformer layer: QKV, attention
// output and the two MLP projections, 12 weight matrices of H x H each
// at 2 FLOPs per multiply-add.
Flops fcl_ops(std::int64_t forward_size, std::int64_t hidden_size);

// Attention score and value products of one layer.
Flops attention_ops(std::int64_t forward_size, std::int64_t hidden_size);

// fcl_ops + attention_ops, i.e. 24*S*H^2*(1 + S/(6H)).
Flops layer_ops(std::int64_t forward_size, std::int64_t hidden_size);

// Work to push one token through every layer of the model.
Flops per_token_ops(const ModelProfile& profile);

// K and V for every layer: 2 * bytes_per_element * L * H.
std::int64_t kvc_bytes_per_token(const ModelProfile& profile);

// Linear through the calibration point: T_0 + T_pf * S_f / S_pf.
double iteration_time(std::int64_t forward_size, const ModelProfile& profile);

// floor(efficiency * X / x); x is per-token FLOPs. Throws ConfigError
// when x <= 0 or X <= 0.
std::int64_t pivot_from_throughput(double peak_flops, double per_token_flops,
                                   double saturation_efficiency);

// pivot_from_throughput with x derived from the model shape.
std::int64_t derive_pivot(std::int64_t hidden_size, std::int64_t num_layers,
                          const GpuProfile& gpu);

// Time to run a pivot-sized forward pass at saturated throughput.
double derive_pivot_time(std::int64_t hidden_size, std::int64_t num_layers,
                         std::int64_t pivot_forward_size,
                         const GpuProfile& gpu);

}  // namespace slosim
