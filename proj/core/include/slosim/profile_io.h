// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slosim/cost_model.h"

namespace slosim {

// On-disk profile as a flat JSON object. Every key is optional so that
// partially specified profiles can be completed by calibration.
struct ProfileDocument {
  std::optional<std::int64_t> hidden_size;
  std::optional<std::int64_t> num_layers;
  std::optional<std::int64_t> pivot_forward_size;
  std::optional<double> pivot_time_s;
  std::optional<std::int64_t> bytes_per_element;
  std::optional<double> fixed_overhead_s;
  std::optional<std::int64_t> kvc_capacity_tokens;
  std::optional<double> peak_flops;
  std::optional<double> saturation_efficiency;

  bool operator==(const ProfileDocument&) const = default;
};

ProfileDocument parse_profile_document(const std::string& text);
std::string dump_profile_document(const ProfileDocument& doc);

ProfileDocument read_profile_document(const std::filesystem::path& path);
void write_profile_document(const std::filesystem::path& path,
                            const ProfileDocument& doc);

// Keys a model profile still lacks. bytes_per_element and
// fixed_overhead_s have defaults and are never reported.
std::vector<std::string> missing_model_keys(const ProfileDocument& doc);

// Throws ConfigError naming every missing key.
ModelProfile to_model_profile(const ProfileDocument& doc);
GpuProfile to_gpu_profile(const ProfileDocument& doc);

ModelProfile load_model_profile(const std::filesystem::path& path);
GpuProfile load_gpu_profile(const std::filesystem::path& path);

// Fills pivot_forward_size and pivot_time_s from the GPU throughput when
// absent. Existing values are kept. Throws ConfigError listing what is
// still missing after the attempt.
ProfileDocument calibrate_profile(ProfileDocument model,
                                  const ProfileDocument& gpu);

}  // namespace slosim
