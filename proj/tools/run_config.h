// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slosim/engine.h"
#include "slosim/policies.h"
#include "slosim/workload.h"

namespace slosim::cli {

// Declarative run description. Flags given on the command line override
// the matching keys of the config file.
struct RunConfig {
  std::optional<std::filesystem::path> trace_path;
  std::optional<TraceConfig> gen;
  std::optional<std::string> profile;  // path, or builtin:opt13b / builtin:opt175b
  std::optional<std::filesystem::path> gpu;
  std::vector<PolicyConfig> policies;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon_s;
  std::string baseline;
  EngineConfig engine;
  int jobs = 1;
};

LengthDist length_dist_from_json(const nlohmann::json& j);
ScaleDist scale_dist_from_json(const nlohmann::json& j);
TraceConfig trace_config_from_json(const nlohmann::json& j);
PolicyConfig policy_config_from_json(const nlohmann::json& j);
EngineConfig engine_config_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

// Reads a JSON document. IoError when unreadable, ConfigError when the
// content is not JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace slosim::cli
