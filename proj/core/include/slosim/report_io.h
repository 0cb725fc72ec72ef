// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slosim/metrics.h"

namespace slosim {

// Fixed column order of the per-run CSV.
const std::vector<std::string>& report_csv_columns();

std::string report_csv_header();
std::string report_csv_row(const MetricsReport& rep);
std::string reports_to_csv(const std::vector<MetricsReport>& reps);

nlohmann::json report_to_json(const MetricsReport& rep);
MetricsReport report_from_json(const nlohmann::json& j);

std::vector<MetricsReport> read_reports(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Per-metric ratio of each report to a named baseline. ConfigError when
// the baseline is absent or fewer than two reports are given;
// ValidationError when the reports come from different traces.
struct Comparison {
  std::string baseline;
  std::vector<std::string> metrics;
  std::vector<std::string> policies;          // non-baseline, in input order
  std::vector<std::vector<double>> ratios;    // [metric][policy]
};

Comparison compare_reports(const std::vector<MetricsReport>& reps,
                           const std::string& baseline);
std::string format_comparison(const Comparison& cmp);
nlohmann::json comparison_to_json(const Comparison& cmp);

}  // namespace slosim
