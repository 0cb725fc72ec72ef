// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/policies.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "policy_internal.h"
#include "slosim/errors.h"

namespace slosim {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::OrcaFcfs: return "OrcaFcfs";
    case PolicyKind::PagedFcfs: return "PagedFcfs";
    case PolicyKind::StaticChunk: return "StaticChunk";
    case PolicyKind::AccelGen: return "AccelGen";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  std::string lower;
  for (char c : name) {
    if (c == '_' || c == '-') continue;
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "orcafcfs" || lower == "orca") return PolicyKind::OrcaFcfs;
  if (lower == "pagedfcfs" || lower == "paged" || lower == "vllm") {
    return PolicyKind::PagedFcfs;
  }
  if (lower == "staticchunk" || lower == "sarathi") return PolicyKind::StaticChunk;
  if (lower == "accelgen") return PolicyKind::AccelGen;
  throw ConfigError(fmt::format("unknown policy '{}'", name));
}

void PolicyConfig::validate() const {
  if (!(gamma_s >= 0.0)) throw ConfigError("gamma_s must be >= 0");
  if (budget_cap_tokens < 0) throw ConfigError("budget_cap_tokens must be >= 0");
  if (static_chunk_len < 1) throw ConfigError("static_chunk_len must be >= 1");
  if (max_concurrent_long < 1) throw ConfigError("max_concurrent_long must be >= 1");
  if (orca_batch_size < 1) throw ConfigError("orca_batch_size must be >= 1");
  if (orca_max_seq < 1) throw ConfigError("orca_max_seq must be >= 1");
  if (!(urgency_slack >= 0.0)) throw ConfigError("urgency_slack must be >= 0");
}

std::string PolicyConfig::display_name() const {
  return label.empty() ? std::string(to_string(kind)) : label;
}

std::int64_t PolicyConfig::resolved_cap(const ModelProfile& profile) const {
  return budget_cap_tokens == 0 ? profile.pivot_forward_size : budget_cap_tokens;
}

std::int64_t token_budget(double slo_min, const ModelProfile& profile,
                          std::int64_t cap) {
  if (!std::isfinite(slo_min)) return std::max<std::int64_t>(cap, 1);
  // Inverse of iteration_time, so a full batch runs within slo_min.
  const double raw = static_cast<double>(profile.pivot_forward_size) *
                     (slo_min - profile.fixed_overhead_s) / profile.pivot_time_s;
  const double floored = std::floor(raw);
  std::int64_t budget = floored >= static_cast<double>(cap)
                            ? cap
                            : static_cast<std::int64_t>(floored);
  return std::max<std::int64_t>(budget, 1);
}

std::optional<Pick> fit_candidate(const Candidate& c, std::int64_t avail_compute,
                                  std::int64_t avail_memory,
                                  std::int64_t block_size) {
  if (!c.chunkable) {
    if (c.tokens < 1 || c.tokens > avail_compute || c.memory > avail_memory) {
      return std::nullopt;
    }
    return Pick{c.key, c.tokens, c.memory};
  }
  const std::int64_t by_memory = c.headroom + avail_memory - c.restore;
  const std::int64_t len = std::min({c.tokens, avail_compute, by_memory});
  if (len < 1) return std::nullopt;
  // Blocks needed to restore the saved tokens and append len more, beyond
  // the headroom already held.
  const std::int64_t overflow = c.restore + len - c.headroom;
  const std::int64_t blocks =
      overflow <= 0 ? 0 : (overflow + block_size - 1) / block_size;
  return Pick{c.key, len, blocks * block_size};
}

namespace {

long double distance2(std::int64_t ac, std::int64_t am, std::int64_t dc,
                      std::int64_t dm) {
  const long double x = static_cast<long double>(ac - dc);
  const long double y = static_cast<long double>(am - dm);
  return x * x + y * y;
}

struct Bucket {
  std::int64_t compute;
  std::int64_t memory;
  bool new_long;
  std::vector<std::size_t> keys;  // ascending
  std::size_t next = 0;
};

}  // namespace

std::vector<Pick> select_requests(std::int64_t avail_compute,
                                  std::int64_t avail_memory,
                                  std::vector<Candidate> candidates,
                                  std::int64_t block_size,
                                  std::int64_t long_slots) {
  // Fixed candidates with identical demand are interchangeable up to the
  // key tie-break, so they are grouped to keep each pick cheap.
  std::map<std::tuple<std::int64_t, std::int64_t, bool>, Bucket> grouped;
  std::vector<Candidate> chunkable;
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
  for (const auto& c : candidates) {
    if (c.chunkable) {
      chunkable.push_back(c);
      continue;
    }
    auto& b = grouped[{c.tokens, c.memory, c.new_long}];
    b.compute = c.tokens;
    b.memory = c.memory;
    b.new_long = c.new_long;
    b.keys.push_back(c.key);
  }
  std::vector<Bucket> buckets;
  buckets.reserve(grouped.size());
  for (auto& [k, b] : grouped) buckets.push_back(std::move(b));
  std::vector<bool> chunk_taken(chunkable.size(), false);

  std::vector<Pick> picks;
  while (true) {
    std::optional<Pick> best;
    long double best_d = 0;
    Bucket* best_bucket = nullptr;
    std::size_t best_chunk = 0;
    auto consider = [&](const Pick& p, long double d) {
      if (!best || d < best_d || (d == best_d && p.key < best->key)) {
        best = p;
        best_d = d;
        return true;
      }
      return false;
    };
    for (auto& b : buckets) {
      if (b.next >= b.keys.size()) continue;
      if (b.new_long && long_slots <= 0) continue;
      if (b.compute < 1 || b.compute > avail_compute || b.memory > avail_memory) {
        continue;
      }
      const Pick p{b.keys[b.next], b.compute, b.memory};
      if (consider(p, distance2(avail_compute, avail_memory, b.compute, b.memory))) {
        best_bucket = &b;
      }
    }
    for (std::size_t i = 0; i < chunkable.size(); ++i) {
      if (chunk_taken[i]) continue;
      if (chunkable[i].new_long && long_slots <= 0) continue;
      auto fit = fit_candidate(chunkable[i], avail_compute, avail_memory, block_size);
      if (!fit) continue;
      if (consider(*fit, distance2(avail_compute, avail_memory, fit->compute,
                                   fit->memory))) {
        best_bucket = nullptr;
        best_chunk = i;
      }
    }
    if (!best) break;
    bool took_long = false;
    if (best_bucket) {
      ++best_bucket->next;
      took_long = best_bucket->new_long;
    } else {
      chunk_taken[best_chunk] = true;
      took_long = chunkable[best_chunk].new_long;
    }
    if (took_long) --long_slots;
    avail_compute -= best->compute;
    avail_memory -= best->memory;
    picks.push_back(*best);
  }
  return picks;
}

void finalize_plan(BatchPlan& plan, const PlanningView& view) {
  // Queue position of each selected id; the batch is small next to the queue.
  std::unordered_map<RequestId, std::size_t> pos;
  pos.reserve(plan.selections.size());
  for (const auto& s : plan.selections) pos.emplace(s.id, view.queue.size());
  for (std::size_t i = 0; i < view.queue.size(); ++i) {
    if (auto it = pos.find(view.queue[i].id); it != pos.end()) it->second = i;
  }
  std::int64_t total = 0;
  for (auto& s : plan.selections) {
    auto it = pos.find(s.id);
    if (it->second == view.queue.size()) {
      throw InvariantViolation(fmt::format("plan selects request {} not in queue", s.id));
    }
    const QueueEntry& e = view.queue[it->second];
    if (s.chunk_len < 1) {
      throw InvariantViolation(fmt::format("empty chunk for request {}", s.id));
    }
    s.is_prompt = e.wants_prompt();
    if (s.is_prompt && s.chunk_len > e.remaining_prompt) {
      throw InvariantViolation(fmt::format("chunk overruns prompt of {}", s.id));
    }
    if (!s.is_prompt && s.chunk_len != 1) {
      throw InvariantViolation(fmt::format("generation step of {} is not 1 token", s.id));
    }
    s.is_final_chunk = !s.is_prompt || s.chunk_len == e.remaining_prompt;
    total += s.chunk_len;
  }
  std::sort(plan.selections.begin(), plan.selections.end(),
            [&](const Selection& a, const Selection& b) { return pos[a.id] < pos[b.id]; });
  plan.forward_size = total;
  if (plan.forward_size > plan.token_budget) {
    throw InvariantViolation(fmt::format("forward size {} exceeds budget {}",
                                         plan.forward_size, plan.token_budget));
  }
}

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case PolicyKind::AccelGen: return detail::make_accelgen(cfg);
    case PolicyKind::PagedFcfs: return detail::make_paged_fcfs(cfg);
    case PolicyKind::StaticChunk: return detail::make_static_chunk(cfg);
    case PolicyKind::OrcaFcfs: return detail::make_orca_fcfs(cfg);
  }
  throw ConfigError("unknown policy kind");
}

}  // namespace slosim
