// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

// SLO-ordered, multi-resource batching with dynamic chunking and
// exclusive long-prompt allocation.

#include <algorithm>
#include <limits>

#include "policy_internal.h"
#include "slosim/errors.h"

namespace slosim::detail {

namespace {

constexpr std::int64_t kUnlimited = std::numeric_limits<std::int64_t>::max() / 4;

struct Member {
  std::size_t pos = 0;
  std::int64_t chunk = 0;
  std::int64_t memory = 0;  // KV tokens (whole blocks)
  bool prompt = false;
  bool new_long = false;
};

class AccelGenPolicy final : public Policy {
 public:
  explicit AccelGenPolicy(PolicyConfig cfg) : Policy(std::move(cfg)) {}

  BatchPlan plan(const PlanningView& v) override;
};

// Urgent entries are taken greedily in the order they would survive the
// shed-the-loosest loop: returned generation steps first (they are kept in
// the batch as long as possible so they finish and free their cache),
// then prompts, each group by ascending remaining time.
class Planner {
 public:
  Planner(const PolicyConfig& cfg, const PlanningView& v)
      : cfg_(cfg),
        v_(v),
        pool_(*v.pool),
        b_(v.pool->block_size()),
        n_(v.queue.size()),
        in_batch_(n_, false),
        swapped_(n_, false),
        urgent_(n_, false) {}

  BatchPlan run();

 private:
  bool is_new_long(const QueueEntry& e) const {
    if (!cfg_.era_enabled || !e.is_long || !e.wants_prompt()) return false;
    return v_.active_long == nullptr || !v_.active_long->contains(e.id);
  }

  Candidate chunk_candidate(std::size_t pos, std::int64_t max_tokens) const {
    const QueueEntry& e = v_.queue[pos];
    Candidate c;
    c.key = pos;
    c.chunkable = true;
    c.tokens = std::min(e.remaining_prompt, max_tokens);
    c.headroom = pool_.headroom(e.id);
    c.restore = pool_.swapped_tokens(e.id).value_or(0);
    c.new_long = is_new_long(e);
    return c;
  }

  // KV tokens a prompt needs for its smallest useful chunk.
  std::int64_t min_prompt_memory(std::size_t pos) const {
    const Candidate c = chunk_candidate(pos, 1);
    const std::int64_t overflow = c.restore + 1 - c.headroom;
    return overflow <= 0 ? 0 : (overflow + b_ - 1) / b_ * b_;
  }

  void add_member(const Member& m) {
    if (m.new_long) --long_slots_;
    in_batch_[m.pos] = true;
    used_c_ += m.chunk;
    used_m_ += m.memory;
    members_.push_back(m);
  }

  void swap_out(std::size_t pos) {
    const QueueEntry& e = v_.queue[pos];
    avail_memory_ += pool_.residency(e.id)->blocks_held * b_;
    swapped_[pos] = true;
    plan_.preempted.push_back(e.id);
  }

  bool swappable(std::size_t pos) const { return !in_batch_[pos] && !swapped_[pos]; }

  // Swaps out residents from the front of victims_ that pass `allowed`
  // until `need` KV tokens are free. Nothing is swapped when that is not
  // reachable.
  template <typename Pred>
  bool make_room(std::int64_t need, Pred allowed) {
    std::int64_t free = avail_memory_ - used_m_;
    if (need <= free) return true;
    std::vector<std::size_t> chosen;
    for (std::size_t pos : victims_) {
      if (!swappable(pos) || !allowed(pos)) continue;
      chosen.push_back(pos);
      free += pool_.residency(v_.queue[pos].id)->blocks_held * b_;
      if (need <= free) break;
    }
    if (need > free) return false;
    for (std::size_t pos : chosen) swap_out(pos);
    return true;
  }

  bool admit_step(std::size_t pos);
  bool admit_prompt(std::size_t pos, bool forced);
  void fill_from_window();
  void force_progress();

  const PolicyConfig& cfg_;
  const PlanningView& v_;
  const BlockPool& pool_;
  std::int64_t b_;
  std::size_t n_;
  std::vector<bool> in_batch_;
  std::vector<bool> swapped_;
  std::vector<bool> urgent_;
  // Residents ordered as preemption victims: prompts before generation
  // steps, loosest remaining time first.
  std::vector<std::size_t> victims_;
  std::vector<Member> members_;
  std::int64_t budget_ = 0;
  std::int64_t avail_memory_ = 0;
  std::int64_t used_c_ = 0;
  std::int64_t used_m_ = 0;
  std::int64_t long_slots_ = 0;
  BatchPlan plan_;
};

BatchPlan Planner::run() {
  const auto cap = cfg_.resolved_cap(*v_.profile);
  plan_.token_budget = std::max<std::int64_t>(cap, 1);
  if (n_ == 0) return plan_;

  long_slots_ = kUnlimited;
  if (cfg_.era_enabled) {
    const auto active =
        static_cast<std::int64_t>(v_.active_long ? v_.active_long->size() : 0);
    long_slots_ = cfg_.max_concurrent_long - active;
  }

  double slo_min = std::numeric_limits<double>::infinity();
  if (auto s = iteration_slo(v_.queue[0])) slo_min = *s;
  std::vector<std::size_t> steps;
  std::vector<std::size_t> prompts;
  for (std::size_t i = 0; i < n_; ++i) {
    if (pool_.is_resident(v_.queue[i].id)) victims_.push_back(i);
    if (!is_urgent(v_.queue[i], v_.remaining[i], v_.now, *v_.stats, cfg_.urgency_slack)) {
      continue;
    }
    urgent_[i] = true;
    plan_.urgent.push_back(v_.queue[i].id);
    if (auto s = iteration_slo(v_.queue[i])) slo_min = std::min(slo_min, *s);
    (v_.queue[i].wants_prompt() ? prompts : steps).push_back(i);
  }
  std::stable_sort(victims_.begin(), victims_.end(), [&](std::size_t a, std::size_t b) {
    const bool pa = v_.queue[a].wants_prompt();
    const bool pb = v_.queue[b].wants_prompt();
    if (pa != pb) return pa;
    return v_.remaining[a] > v_.remaining[b];
  });
  budget_ = token_budget(slo_min, *v_.profile, cap);
  plan_.token_budget = budget_;
  plan_.slo_min = slo_min;
  avail_memory_ = pool_.free_tokens();

  for (std::size_t i : steps) {
    if (!swapped_[i] && admit_step(i)) continue;
    if (!swapped_[i]) plan_.deferred.push_back(v_.queue[i].id);
  }
  for (std::size_t i : prompts) {
    if (!swapped_[i] && admit_prompt(i, false)) continue;
    if (!swapped_[i]) plan_.deferred.push_back(v_.queue[i].id);
  }
  fill_from_window();
  if (members_.empty()) force_progress();

  for (const auto& m : members_) {
    plan_.selections.push_back(Selection{v_.queue[m.pos].id, m.chunk, m.prompt, false, 0});
  }
  finalize_plan(plan_, v_);
  return std::move(plan_);
}

bool Planner::admit_step(std::size_t pos) {
  if (used_c_ + 1 > budget_) return false;
  const QueueEntry& e = v_.queue[pos];
  const std::int64_t need = entry_demand(e, 1, pool_).blocks_needed * b_;
  if (!make_room(need, [&](std::size_t q) { return q != pos; })) return false;
  add_member(Member{pos, 1, need, false, false});
  return true;
}

bool Planner::admit_prompt(std::size_t pos, bool forced) {
  const QueueEntry& e = v_.queue[pos];
  const bool new_long = is_new_long(e);
  if (new_long && long_slots_ <= 0) return false;
  const std::int64_t room_c = budget_ - used_c_;
  if (room_c < 1) return false;
  const double rt = v_.remaining[pos];
  auto looser_prompt = [&](std::size_t q) {
    if (q == pos) return false;
    return forced || (v_.queue[q].wants_prompt() && v_.remaining[q] > rt);
  };
  if (!make_room(min_prompt_memory(pos), looser_prompt)) return false;
  const auto fit = fit_candidate(chunk_candidate(pos, e.remaining_prompt), room_c,
                                 avail_memory_ - used_m_, b_);
  if (!fit) return false;
  add_member(Member{pos, fit->compute, fit->memory, true, new_long});
  return true;
}

void Planner::fill_from_window() {
  const std::int64_t avail_c = budget_ - used_c_;
  const std::int64_t avail_m = avail_memory_ - used_m_;
  if (avail_c <= 0 || avail_m < 0) return;

  std::optional<double> head;
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < n_; ++i) {
    if (urgent_[i] || in_batch_[i] || swapped_[i]) continue;
    // Long prompts held back by the concurrency limit are not candidates.
    if (long_slots_ <= 0 && is_new_long(v_.queue[i])) continue;
    if (!head) head = v_.remaining[i];
    if (v_.remaining[i] > *head + cfg_.gamma_s) break;
    const QueueEntry& e = v_.queue[i];
    if (e.wants_prompt()) {
      cands.push_back(chunk_candidate(i, e.remaining_prompt));
    } else {
      Candidate c;
      c.key = i;
      c.tokens = 1;
      c.memory = entry_demand(e, 1, pool_).blocks_needed * b_;
      cands.push_back(c);
    }
  }
  const auto picks = select_requests(avail_c, avail_m, std::move(cands), b_,
                                     std::max<std::int64_t>(long_slots_, 0));
  for (const auto& p : picks) {
    add_member(Member{p.key, p.compute, p.memory, v_.queue[p.key].wants_prompt(),
                      is_new_long(v_.queue[p.key])});
  }
}

// Nothing fit: admit the first admissible entry, swapping out whatever it
// takes.
void Planner::force_progress() {
  for (std::size_t i = 0; i < n_; ++i) {
    if (swapped_[i]) continue;
    const QueueEntry& e = v_.queue[i];
    bool ok = false;
    if (e.wants_prompt()) {
      ok = admit_prompt(i, true);
    } else {
      ok = admit_step(i);
    }
    if (ok) {
      std::erase(plan_.deferred, e.id);
      return;
    }
  }
}

BatchPlan AccelGenPolicy::plan(const PlanningView& v) {
  Planner planner(cfg_, v);
  return planner.run();
}

}  // namespace

std::unique_ptr<Policy> make_accelgen(const PolicyConfig& cfg) {
  return std::make_unique<AccelGenPolicy>(cfg);
}

}  // namespace slosim::detail
