// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/profile_io.h"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "slosim/errors.h"

namespace slosim {

namespace {

using nlohmann::json;

template <typename T>
void read_key(const json& j, const char* key, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  if (!it->is_number()) {
    throw ParseError(fmt::format("profile key '{}' must be a number", key), 0);
  }
  out = it->get<T>();
}

template <typename T>
void write_key(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

std::string join(const std::vector<std::string>& keys) {
  return fmt::format("{}", fmt::join(keys, ", "));
}

}  // namespace

ProfileDocument parse_profile_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("profile is not valid JSON: {}", e.what()), 0);
  }
  if (!j.is_object()) throw ParseError("profile must be a JSON object", 0);
  ProfileDocument doc;
  read_key(j, "hidden_size", doc.hidden_size);
  read_key(j, "num_layers", doc.num_layers);
  read_key(j, "pivot_forward_size", doc.pivot_forward_size);
  read_key(j, "pivot_time_s", doc.pivot_time_s);
  read_key(j, "bytes_per_element", doc.bytes_per_element);
  read_key(j, "fixed_overhead_s", doc.fixed_overhead_s);
  read_key(j, "kvc_capacity_tokens", doc.kvc_capacity_tokens);
  read_key(j, "peak_flops", doc.peak_flops);
  read_key(j, "saturation_efficiency", doc.saturation_efficiency);
  return doc;
}

std::string dump_profile_document(const ProfileDocument& doc) {
  json j = json::object();
  write_key(j, "hidden_size", doc.hidden_size);
  write_key(j, "num_layers", doc.num_layers);
  write_key(j, "pivot_forward_size", doc.pivot_forward_size);
  write_key(j, "pivot_time_s", doc.pivot_time_s);
  write_key(j, "bytes_per_element", doc.bytes_per_element);
  write_key(j, "fixed_overhead_s", doc.fixed_overhead_s);
  write_key(j, "kvc_capacity_tokens", doc.kvc_capacity_tokens);
  write_key(j, "peak_flops", doc.peak_flops);
  write_key(j, "saturation_efficiency", doc.saturation_efficiency);
  return j.dump(2) + "\n";
}

ProfileDocument read_profile_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open profile '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_profile_document(ss.str());
}

void write_profile_document(const std::filesystem::path& path,
                            const ProfileDocument& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot write profile '{}'", path.string()));
  }
  out << dump_profile_document(doc);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

std::vector<std::string> missing_model_keys(const ProfileDocument& doc) {
  std::vector<std::string> missing;
  if (!doc.hidden_size) missing.emplace_back("hidden_size");
  if (!doc.num_layers) missing.emplace_back("num_layers");
  if (!doc.pivot_forward_size) missing.emplace_back("pivot_forward_size");
  if (!doc.pivot_time_s) missing.emplace_back("pivot_time_s");
  if (!doc.kvc_capacity_tokens) missing.emplace_back("kvc_capacity_tokens");
  return missing;
}

ModelProfile to_model_profile(const ProfileDocument& doc) {
  if (auto missing = missing_model_keys(doc); !missing.empty()) {
    throw ConfigError("model profile is missing keys: " + join(missing));
  }
  ModelProfile p;
  p.hidden_size = *doc.hidden_size;
  p.num_layers = *doc.num_layers;
  p.pivot_forward_size = *doc.pivot_forward_size;
  p.pivot_time_s = *doc.pivot_time_s;
  p.bytes_per_element = doc.bytes_per_element.value_or(2);
  p.fixed_overhead_s = doc.fixed_overhead_s.value_or(0.0);
  p.kvc_capacity_tokens = *doc.kvc_capacity_tokens;
  p.validate();
  return p;
}

GpuProfile to_gpu_profile(const ProfileDocument& doc) {
  if (!doc.peak_flops) {
    throw ConfigError("gpu profile is missing keys: peak_flops");
  }
  GpuProfile g;
  g.peak_flops = *doc.peak_flops;
  g.saturation_efficiency = doc.saturation_efficiency.value_or(1.0);
  if (doc.kvc_capacity_tokens) g.kvc_capacity_tokens = *doc.kvc_capacity_tokens;
  g.validate();
  return g;
}

ModelProfile load_model_profile(const std::filesystem::path& path) {
  return to_model_profile(read_profile_document(path));
}

GpuProfile load_gpu_profile(const std::filesystem::path& path) {
  return to_gpu_profile(read_profile_document(path));
}

ProfileDocument calibrate_profile(ProfileDocument model,
                                  const ProfileDocument& gpu) {
  const bool needs_pivot = !model.pivot_forward_size;
  const bool needs_time = !model.pivot_time_s;
  if (!model.kvc_capacity_tokens && gpu.kvc_capacity_tokens) {
    model.kvc_capacity_tokens = gpu.kvc_capacity_tokens;
  }
  if (needs_pivot || needs_time) {
    std::vector<std::string> missing;
    if (!model.hidden_size) missing.emplace_back("hidden_size");
    if (!model.num_layers) missing.emplace_back("num_layers");
    const auto peak = model.peak_flops ? model.peak_flops : gpu.peak_flops;
    if (!peak) missing.emplace_back("peak_flops");
    if (!missing.empty()) {
      throw ConfigError("cannot calibrate, missing keys: " + join(missing));
    }
    GpuProfile g;
    g.peak_flops = *peak;
    g.saturation_efficiency = model.saturation_efficiency.value_or(
        gpu.saturation_efficiency.value_or(1.0));
    g.validate();
    if (needs_pivot) {
      model.pivot_forward_size =
          derive_pivot(*model.hidden_size, *model.num_layers, g);
      if (*model.pivot_forward_size < 1) {
        throw ConfigError("derived pivot_forward_size is zero");
      }
    }
    if (needs_time) {
      model.pivot_time_s = derive_pivot_time(
          *model.hidden_size, *model.num_layers, *model.pivot_forward_size, g);
    }
  }
  if (auto missing = missing_model_keys(model); !missing.empty()) {
    throw ConfigError("profile still incomplete, missing keys: " +
                      join(missing));
  }
  return model;
}

}  // namespace slosim
