// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "slosim/errors.h"
#include "slosim/workload.h"

namespace slosim {

namespace {

using nlohmann::json;

RequestSpec record_from_json(const json& j) {
  RequestSpec r;
  r.id = j.at("id").get<RequestId>();
  r.arrival_s = j.at("arrival").get<double>();
  r.prompt_len = j.at("prompt").get<std::int64_t>();
  r.output_len = j.at("output").get<std::int64_t>();
  r.predicted_output_len = r.output_len;
  if (auto it = j.find("predicted_output"); it != j.end() && !it->is_null()) {
    r.predicted_output_len = it->get<std::int64_t>();
  }
  const json& slo = j.at("slo");
  const auto kind = slo.at("kind").get<std::string>();
  auto opt = [&](const char* key) {
    auto it = slo.find(key);
    return (it == slo.end() || it->is_null()) ? 0.0 : it->get<double>();
  };
  if (kind == "online") {
    r.slo = SloSpec{SloKind::Online, opt("ttft"), opt("tbt"), opt("jct")};
  } else if (kind == "offline") {
    r.slo = SloSpec{SloKind::Offline, opt("ttft"), opt("tbt"), opt("jct")};
  } else {
    throw json::other_error::create(501, "slo.kind must be online or offline",
                                    &slo);
  }
  return r;
}

json record_to_json(const RequestSpec& r) {
  json slo = json::object();
  if (r.slo.kind == SloKind::Online) {
    slo["kind"] = "online";
    slo["ttft"] = r.slo.ttft_s;
    slo["tbt"] = r.slo.tbt_s;
  } else {
    slo["kind"] = "offline";
    slo["jct"] = r.slo.jct_s;
  }
  json j = json::object();
  j["id"] = r.id;
  j["arrival"] = r.arrival_s;
  j["prompt"] = r.prompt_len;
  j["output"] = r.output_len;
  if (r.predicted_output_len != r.output_len) {
    j["predicted_output"] = r.predicted_output_len;
  }
  j["slo"] = std::move(slo);
  return j;
}

}  // namespace

std::vector<RequestSpec> parse_trace(const std::string& text) {
  std::vector<RequestSpec> trace;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RequestSpec r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("line {}: {}", lineno, e.what()), lineno);
    }
    try {
      r.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("line {}: {}", lineno, e.what()),
                            e.field());
    }
    trace.push_back(r);
  }
  std::stable_sort(trace.begin(), trace.end(),
                   [](const RequestSpec& a, const RequestSpec& b) {
                     return a.arrival_s < b.arrival_s;
                   });
  return trace;
}

std::vector<RequestSpec> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open trace '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

std::string dump_trace(const std::vector<RequestSpec>& trace) {
  std::string out;
  for (const auto& r : trace) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_trace(const std::filesystem::path& path,
                 const std::vector<RequestSpec>& trace) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write trace '{}'", path.string()));
  out << dump_trace(trace);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

std::string trace_fingerprint(const std::vector<RequestSpec>& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump_trace(trace)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace slosim
