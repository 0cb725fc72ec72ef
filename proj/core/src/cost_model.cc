// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/cost_model.h"

#include <cmath>
#include <string>

#include "slosim/errors.h"

namespace slosim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void ModelProfile::validate() const {
  require(hidden_size >= 1, "hidden_size must be >= 1");
  require(num_layers >= 1, "num_layers must be >= 1");
  require(pivot_forward_size >= 1, "pivot_forward_size must be >= 1");
  require(pivot_time_s > 0.0, "pivot_time_s must be > 0");
  require(bytes_per_element >= 1, "bytes_per_element must be >= 1");
  require(fixed_overhead_s >= 0.0, "fixed_overhead_s must be >= 0");
  require(kvc_capacity_tokens >= 1, "kvc_capacity_tokens must be >= 1");
}

ModelProfile ModelProfile::opt13b() { return ModelProfile{}; }

ModelProfile ModelProfile::opt175b() {
  ModelProfile p;
  p.hidden_size = 12288;
  p.num_layers = 96;
  p.pivot_forward_size = 1280;
  p.pivot_time_s = 0.2;
  p.kvc_capacity_tokens = 262144;
  return p;
}

void GpuProfile::validate() const {
  require(peak_flops > 0.0, "peak_flops must be > 0");
  require(saturation_efficiency > 0.0 && saturation_efficiency <= 1.0,
          "saturation_efficiency must be in (0, 1]");
  require(kvc_capacity_tokens >= 1, "kvc_capacity_tokens must be >= 1");
}

Flops fcl_ops(std::int64_t forward_size, std::int64_t hidden_size) {
  return 24 * forward_size * hidden_size * hidden_size;
}

Flops attention_ops(std::int64_t forward_size, std::int64_t hidden_size) {
  return 4 * forward_size * forward_size * hidden_size;
}

Flops layer_ops(std::int64_t forward_size, std::int64_t hidden_size) {
  return fcl_ops(forward_size, hidden_size) +
         attention_ops(forward_size, hidden_size);
}

Flops per_token_ops(const ModelProfile& profile) {
  return layer_ops(1, profile.hidden_size) * profile.num_layers;
}

std::int64_t kvc_bytes_per_token(const ModelProfile& profile) {
  return 2 * profile.bytes_per_element * profile.num_layers *
         profile.hidden_size;
}

double iteration_time(std::int64_t forward_size, const ModelProfile& profile) {
  const double ratio = static_cast<double>(forward_size) /
                       static_cast<double>(profile.pivot_forward_size);
  return profile.fixed_overhead_s + profile.pivot_time_s * ratio;
}

std::int64_t pivot_from_throughput(double peak_flops, double per_token_flops,
                                   double saturation_efficiency) {
  require(per_token_flops > 0.0, "per-token operation count must be > 0");
  require(peak_flops > 0.0, "peak_flops must be > 0");
  return static_cast<std::int64_t>(
      std::floor(saturation_efficiency * peak_flops / per_token_flops));
}

std::int64_t derive_pivot(std::int64_t hidden_size, std::int64_t num_layers,
                          const GpuProfile& gpu) {
  const auto x = static_cast<double>(layer_ops(1, hidden_size) * num_layers);
  return pivot_from_throughput(gpu.peak_flops, x, gpu.saturation_efficiency);
}

double derive_pivot_time(std::int64_t hidden_size, std::int64_t num_layers,
                         std::int64_t pivot_forward_size,
                         const GpuProfile& gpu) {
  require(pivot_forward_size >= 1, "pivot_forward_size must be >= 1");
  const auto ops = static_cast<double>(
      layer_ops(pivot_forward_size, hidden_size) * num_layers);
  return ops / (gpu.saturation_efficiency * gpu.peak_flops);
}

}  // namespace slosim
