// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/metrics.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "slosim/errors.h"

namespace slosim {

void MetricsAccumulator::on_arrival(const RequestSpec& spec) {
  if (index_.contains(spec.id)) {
    throw StateError(fmt::format("duplicate request id {}", spec.id));
  }
  index_.emplace(spec.id, requests_.size());
  RequestRecord r;
  r.id = spec.id;
  r.slo = spec.slo;
  r.arrival_s = spec.arrival_s;
  r.prompt_len = spec.prompt_len;
  r.output_len = spec.output_len;
  requests_.push_back(std::move(r));
}

RequestRecord& MetricsAccumulator::mutable_request(RequestId id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw StateError(fmt::format("unknown request {}", id));
  return requests_[it->second];
}

const RequestRecord& MetricsAccumulator::request(RequestId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw StateError(fmt::format("unknown request {}", id));
  return requests_[it->second];
}

void MetricsAccumulator::on_reject(RequestId id) { mutable_request(id).rejected = true; }

void MetricsAccumulator::on_chunk(RequestId id, std::int64_t len) {
  mutable_request(id).chunks.push_back(len);
}

void MetricsAccumulator::on_token(RequestId id, double t) {
  auto& r = mutable_request(id);
  if (!r.emissions.empty() && !(t > r.emissions.back())) {
    throw InvariantViolation(fmt::format("non-increasing emission for {}", id));
  }
  r.emissions.push_back(t);
}

void MetricsAccumulator::on_complete(RequestId id, double t) {
  mutable_request(id).completion_s = t;
}

void MetricsAccumulator::on_preempt(RequestId id) { ++mutable_request(id).preemptions; }

void MetricsAccumulator::on_iteration(const IterationRecord& rec) {
  iterations_.push_back(rec);
}

TokenSloTally token_slo_tally(const RequestRecord& r) {
  TokenSloTally t;
  t.total = r.output_len;
  if (r.slo.kind != SloKind::Online) return t;
  for (std::size_t k = 0; k < r.emissions.size(); ++k) {
    const bool met = k == 0 ? r.emissions[0] - r.arrival_s <= r.slo.ttft_s
                            : r.emissions[k] - r.emissions[k - 1] <= r.slo.tbt_s;
    if (met) ++t.met;
  }
  return t;
}

bool is_good(const RequestRecord& r) {
  if (!r.completed()) return false;
  if (r.slo.kind == SloKind::Offline) {
    return *r.completion_s - r.arrival_s <= r.slo.jct_s;
  }
  const auto t = token_slo_tally(r);
  return t.met == t.total;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

MetricsReport compute_metrics(const MetricsAccumulator& acc, double window_s) {
  MetricsReport rep;
  rep.truncated = acc.truncated();
  rep.makespan_s = acc.end_s();
  rep.requests = static_cast<std::int64_t>(acc.requests().size());
  rep.iterations = static_cast<std::int64_t>(acc.iterations().size());

  std::int64_t tokens = 0;
  std::int64_t good = 0;
  std::int64_t online_met = 0;
  std::int64_t online_total = 0;
  std::int64_t offline_total = 0;
  std::int64_t offline_met = 0;
  std::vector<double> jcts;
  std::vector<double> good_times;
  for (const auto& r : acc.requests()) {
    for (auto c : r.chunks) tokens += c;
    tokens += static_cast<std::int64_t>(r.emissions.size());
    rep.preemptions += r.preemptions;
    if (r.rejected) ++rep.rejected;
    if (r.completed()) {
      ++rep.completed;
      jcts.push_back(*r.completion_s - r.arrival_s);
    }
    if (r.slo.kind == SloKind::Online) {
      const auto t = token_slo_tally(r);
      online_met += t.met;
      online_total += t.total;
    } else {
      ++offline_total;
      if (is_good(r)) ++offline_met;
    }
    if (is_good(r)) {
      ++good;
      good_times.push_back(*r.completion_s);
    }
  }

  if (rep.makespan_s > 0.0) {
    rep.tokens_per_s = static_cast<double>(tokens) / rep.makespan_s;
    rep.reqs_per_s = static_cast<double>(rep.completed) / rep.makespan_s;
    rep.goodput_whole = static_cast<double>(good) / rep.makespan_s;
    const auto windows = static_cast<std::int64_t>(std::ceil(rep.makespan_s / window_s));
    std::vector<std::int64_t> per_window(static_cast<std::size_t>(std::max<std::int64_t>(windows, 1)), 0);
    for (double t : good_times) {
      auto w = static_cast<std::size_t>(std::floor(t / window_s));
      w = std::min(w, per_window.size() - 1);
      ++per_window[w];
    }
    double sum = 0.0;
    for (auto c : per_window) sum += static_cast<double>(c) / window_s;
    rep.goodput = sum / static_cast<double>(per_window.size());
  }
  rep.slo_attainment = online_total > 0
                           ? static_cast<double>(online_met) / static_cast<double>(online_total)
                           : 1.0;
  rep.jct_slo_attainment = offline_total > 0 ? static_cast<double>(offline_met) /
                                                   static_cast<double>(offline_total)
                                             : 1.0;
  if (!jcts.empty()) {
    double s = 0.0;
    for (double j : jcts) s += j;
    rep.jct_mean = s / static_cast<double>(jcts.size());
    rep.jct_p5 = percentile(jcts, 5.0);
    rep.jct_p95 = percentile(jcts, 95.0);
  }
  double gpu = 0.0;
  double kvc = 0.0;
  std::int64_t busy = 0;
  for (const auto& it : acc.iterations()) {
    if (it.forward_size == 0) continue;
    ++busy;
    gpu += static_cast<double>(it.forward_size) / static_cast<double>(it.token_budget);
    kvc += static_cast<double>(it.allocated_tokens) / static_cast<double>(it.total_tokens);
  }
  if (busy > 0) {
    rep.gpu_util_mean = gpu / static_cast<double>(busy);
    rep.kvc_util_mean = kvc / static_cast<double>(busy);
  }
  return rep;
}

}  // namespace slosim
