// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

// First-come-first-served baselines: whole-sequence reservation (Orca),
// paged allocation without chunking (vLLM) and fixed-size chunked prefill
// with decode priority (Sarathi).

#include <algorithm>

#include "policy_internal.h"
#include "slosim/errors.h"

namespace slosim::detail {

namespace {

class FcfsPlanner {
 public:
  FcfsPlanner(const PlanningView& v, std::int64_t budget)
      : v_(v),
        pool_(*v.pool),
        b_(v.pool->block_size()),
        budget_(budget),
        chosen_(v.queue.size(), false),
        swapped_(v.queue.size(), false),
        avail_memory_(v.pool->free_tokens()) {
    order_.resize(v.queue.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      const auto& x = v_.queue[a];
      const auto& y = v_.queue[b];
      if (x.arrival_s != y.arrival_s) return x.arrival_s < y.arrival_s;
      return x.id < y.id;
    });
    plan_.token_budget = budget_;
  }

  const QueueEntry& entry(std::size_t pos) const { return v_.queue[pos]; }
  bool resident(std::size_t pos) const { return pool_.is_resident(entry(pos).id); }
  bool known(std::size_t pos) const { return pool_.knows(entry(pos).id); }

  std::int64_t used_memory() const { return used_memory_; }
  std::int64_t free_memory() const { return avail_memory_ - used_memory_; }
  std::int64_t used_compute() const { return used_compute_; }

  // Generation steps of every resident request, oldest first. Frees KV by
  // swapping out the newest resident when a step needs a fresh block.
  void schedule_decodes() {
    for (auto pos : order_) {
      if (swapped_[pos] || !resident(pos) || entry(pos).wants_prompt()) continue;
      if (used_compute_ + 1 > budget_) return;
      std::int64_t mem = entry_demand(entry(pos), 1, pool_).blocks_needed * b_;
      bool self_evicted = false;
      while (mem > free_memory()) {
        const auto victim = newest_unchosen_resident();
        if (!victim) break;
        swap_out(*victim);
        if (*victim == pos) {
          self_evicted = true;
          break;
        }
      }
      if (self_evicted || mem > free_memory()) continue;
      take(pos, 1, mem, 0);
    }
  }

  std::optional<std::size_t> newest_unchosen_resident() const {
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      if (!chosen_[*it] && !swapped_[*it] && resident(*it)) return *it;
    }
    return std::nullopt;
  }

  void swap_out(std::size_t pos) {
    avail_memory_ += pool_.residency(entry(pos).id)->blocks_held * b_;
    swapped_[pos] = true;
    plan_.preempted.push_back(entry(pos).id);
  }

  void take(std::size_t pos, std::int64_t tokens, std::int64_t memory,
            std::int64_t reserve) {
    chosen_[pos] = true;
    used_compute_ += tokens;
    used_memory_ += memory;
    plan_.selections.push_back(Selection{entry(pos).id, tokens,
                                         entry(pos).wants_prompt(), false, reserve});
  }

  // Grows the budget so a lone oversized prompt can still run whole.
  bool admit_compute(std::int64_t tokens, bool allow_stretch) {
    if (used_compute_ + tokens <= budget_) return true;
    if (!allow_stretch) return false;
    budget_ = used_compute_ + tokens;
    plan_.token_budget = budget_;
    return true;
  }

  BatchPlan finish() {
    finalize_plan(plan_, v_);
    return std::move(plan_);
  }

  const std::vector<std::size_t>& order() const { return order_; }
  bool chosen(std::size_t pos) const { return chosen_[pos]; }
  bool swapped(std::size_t pos) const { return swapped_[pos]; }

 private:
  const PlanningView& v_;
  const BlockPool& pool_;
  std::int64_t b_;
  std::int64_t budget_;
  std::vector<std::size_t> order_;
  std::vector<bool> chosen_;
  std::vector<bool> swapped_;
  std::int64_t avail_memory_;
  std::int64_t used_memory_ = 0;
  std::int64_t used_compute_ = 0;
  BatchPlan plan_;
};

// Ongoing work before new work: partial prefills, then swapped requests,
// then prompts the cache has never seen.
std::vector<std::size_t> admission_order(const FcfsPlanner& p) {
  std::vector<std::size_t> groups[3];
  for (auto pos : p.order()) {
    if (p.chosen(pos) || p.swapped(pos)) continue;
    if (p.resident(pos)) {
      if (p.entry(pos).wants_prompt()) groups[0].push_back(pos);
    } else {
      groups[p.known(pos) ? 1 : 2].push_back(pos);
    }
  }
  groups[0].insert(groups[0].end(), groups[1].begin(), groups[1].end());
  groups[0].insert(groups[0].end(), groups[2].begin(), groups[2].end());
  return std::move(groups[0]);
}

class StaticChunkPolicy final : public Policy {
 public:
  explicit StaticChunkPolicy(PolicyConfig cfg) : Policy(std::move(cfg)) {}

  BatchPlan plan(const PlanningView& v) override {
    FcfsPlanner p(v, cfg_.resolved_cap(*v.profile));
    p.schedule_decodes();
    for (auto pos : admission_order(p)) {
      const QueueEntry& e = p.entry(pos);
      const std::int64_t chunk =
          e.wants_prompt() ? std::min(e.remaining_prompt, cfg_.static_chunk_len) : 1;
      if (!p.admit_compute(chunk, false)) break;
      const std::int64_t mem =
          entry_demand(e, chunk, *v.pool).blocks_needed * v.pool->block_size();
      if (mem > p.free_memory()) break;
      p.take(pos, chunk, mem, 0);
    }
    return p.finish();
  }
};

class PagedFcfsPolicy final : public Policy {
 public:
  explicit PagedFcfsPolicy(PolicyConfig cfg) : Policy(std::move(cfg)) {}

  BatchPlan plan(const PlanningView& v) override {
    FcfsPlanner p(v, cfg_.resolved_cap(*v.profile));
    p.schedule_decodes();
    bool any_prompt = false;
    for (auto pos : admission_order(p)) {
      const QueueEntry& e = p.entry(pos);
      const std::int64_t tokens = e.wants_prompt() ? e.remaining_prompt : 1;
      const std::int64_t mem =
          entry_demand(e, tokens, *v.pool).blocks_needed * v.pool->block_size();
      // The first prompt that does not fit closes the batch.
      if (mem > p.free_memory()) break;
      if (!p.admit_compute(tokens, e.wants_prompt() && !any_prompt)) break;
      any_prompt = any_prompt || e.wants_prompt();
      p.take(pos, tokens, mem, 0);
    }
    return p.finish();
  }
};

class OrcaFcfsPolicy final : public Policy {
 public:
  explicit OrcaFcfsPolicy(PolicyConfig cfg) : Policy(std::move(cfg)) {}

  BatchPlan plan(const PlanningView& v) override {
    FcfsPlanner p(v, cfg_.resolved_cap(*v.profile));
    p.schedule_decodes();
    auto in_flight = static_cast<std::int64_t>(v.pool->resident_count());
    bool any_prompt = false;
    const auto b = v.pool->block_size();
    for (auto pos : admission_order(p)) {
      const QueueEntry& e = p.entry(pos);
      const bool fresh = !p.known(pos);
      if (fresh && in_flight >= cfg_.orca_batch_size) break;
      const std::int64_t tokens = e.wants_prompt() ? e.remaining_prompt : 1;
      std::int64_t reserve = 0;
      std::int64_t mem = 0;
      if (fresh) {
        reserve = std::min(std::max(cfg_.orca_max_seq, e.prompt_len + e.predicted_output_len),
                           v.pool->total_tokens());
        mem = v.pool->blocks_for(reserve) * b;
      } else {
        mem = entry_demand(e, tokens, *v.pool).blocks_needed * b;
      }
      if (mem > p.free_memory()) break;
      if (!p.admit_compute(tokens, e.wants_prompt() && !any_prompt)) break;
      any_prompt = any_prompt || e.wants_prompt();
      p.take(pos, tokens, mem, reserve);
      if (fresh) ++in_flight;
    }
    return p.finish();
  }
};

}  // namespace

std::unique_ptr<Policy> make_static_chunk(const PolicyConfig& cfg) {
  return std::make_unique<StaticChunkPolicy>(cfg);
}

std::unique_ptr<Policy> make_paged_fcfs(const PolicyConfig& cfg) {
  return std::make_unique<PagedFcfsPolicy>(cfg);
}

std::unique_ptr<Policy> make_orca_fcfs(const PolicyConfig& cfg) {
  return std::make_unique<OrcaFcfsPolicy>(cfg);
}

}  // namespace slosim::detail
