// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/engine.h"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_map>

#include "slosim/errors.h"

namespace slosim {

Engine::Engine(std::vector<RequestSpec> trace, std::unique_ptr<Policy> policy,
               ModelProfile profile, EngineConfig cfg)
    : trace_(std::move(trace)),
      policy_(std::move(policy)),
      profile_(profile),
      cfg_(cfg),
      pool_(BlockPool::from_capacity_tokens(profile.kvc_capacity_tokens, cfg.block_size)),
      stats_(ChunkStats::for_profile(profile)) {
  profile_.validate();
  if (!policy_) throw ConfigError("engine needs a policy");
  for (const auto& r : trace_) r.validate();
  std::stable_sort(trace_.begin(), trace_.end(),
                   [](const RequestSpec& a, const RequestSpec& b) {
                     return a.arrival_s < b.arrival_s;
                   });
}

void Engine::admit_arrivals() {
  while (next_arrival_ < trace_.size() && trace_[next_arrival_].arrival_s <= clock_) {
    const RequestSpec& r = trace_[next_arrival_++];
    metrics_.on_arrival(r);
    // A request whose full sequence can never fit is refused outright.
    if (pool_.blocks_for(r.prompt_len + r.output_len) > pool_.total_blocks()) {
      metrics_.on_reject(r.id);
      continue;
    }
    QueueEntry e;
    e.id = r.id;
    e.phase = Phase::PromptPending;
    e.prompt_len = r.prompt_len;
    e.remaining_prompt = r.prompt_len;
    e.predicted_output_len = r.predicted_output_len;
    e.arrival_s = r.arrival_s;
    e.enqueue_time = r.arrival_s;
    e.enqueue_seq = enqueue_seq_++;
    e.slo = r.slo;
    e.is_long = r.is_long();
    if (r.slo.kind == SloKind::Offline) e.jct = open_jct_ledger(r, stats_);
    output_len_[r.id] = r.output_len;
    queue_.push_back(std::move(e));
  }
}

bool Engine::step() {
  if (done_) return false;
  admit_arrivals();
  if (queue_.empty()) {
    if (next_arrival_ >= trace_.size()) {
      done_ = true;
      metrics_.set_end(clock_, false);
      return false;
    }
    clock_ = std::max(clock_, trace_[next_arrival_].arrival_s);
    return true;
  }
  if (clock_ >= cfg_.horizon_s) {
    truncated_ = true;
    done_ = true;
    metrics_.set_end(clock_, true);
    return false;
  }

  remaining_ = order_queue(queue_, clock_, stats_);
  PlanningView view{queue_, remaining_, &pool_, &stats_, &profile_, &active_long_, clock_};
  BatchPlan plan = policy_->plan(view);

  std::vector<QueueEntry> snapshot;
  std::vector<double> snapshot_rt;
  if (observer_) {
    snapshot = queue_;
    snapshot_rt = remaining_;
  }
  const double start = clock_;
  std::vector<RequestId> emitted;
  std::vector<std::pair<RequestId, double>> allowances;
  apply(plan, emitted, allowances);

  if (plan.empty()) {
    if (next_arrival_ < trace_.size()) {
      clock_ = std::max(clock_, trace_[next_arrival_].arrival_s);
    } else if (plan.preempted.empty() || ++idle_plans_ > static_cast<std::int64_t>(queue_.size()) + 2) {
      throw InvariantViolation(fmt::format(
          "policy {} made no progress with {} live requests",
          policy_->config().display_name(), queue_.size()));
    }
  } else {
    idle_plans_ = 0;
  }

  if (observer_) {
    StepTrace t;
    t.start_s = start;
    t.end_s = clock_;
    t.queue = snapshot;
    t.remaining = snapshot_rt;
    t.plan = &plan;
    t.active_long = &active_long_;
    t.emitted = emitted;
    t.allowances = allowances;
    observer_(t);
  }
  if (cfg_.check_invariants) pool_.check_invariants();
  return true;
}

void Engine::apply(const BatchPlan& plan, std::vector<RequestId>& emitted,
                   std::vector<std::pair<RequestId, double>>& allowances) {
  constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
  std::unordered_map<RequestId, std::size_t> pos;
  pos.reserve(plan.selections.size() + plan.preempted.size());
  for (const auto& s : plan.selections) pos.emplace(s.id, kAbsent);
  for (RequestId id : plan.preempted) pos.emplace(id, kAbsent);
  for (std::size_t i = 0; i < queue_.size(); ++i) {
    if (auto it = pos.find(queue_[i].id); it != pos.end()) it->second = i;
  }
  auto find = [&](RequestId id) -> QueueEntry& {
    auto it = pos.find(id);
    if (it == pos.end() || it->second == kAbsent) {
      throw InvariantViolation(fmt::format("plan names unknown request {}", id));
    }
    return queue_[it->second];
  };

  const double start = clock_;
  std::int64_t swap_tokens = 0;
  for (RequestId id : plan.preempted) {
    QueueEntry& e = find(id);
    if (!pool_.is_resident(id)) {
      throw InvariantViolation(fmt::format("preempting non-resident request {}", id));
    }
    swap_tokens += pool_.preempt(id);
    e.phase = Phase::Preempted;
    e.enqueue_time = clock_;
    e.enqueue_seq = enqueue_seq_++;
    preempted_at_[id] = clock_;
    stats_.observe_preemption();
    metrics_.on_preempt(id);
  }

  // Feasibility against the pool as it stands after the swaps.
  std::int64_t need = 0;
  std::unordered_set<RequestId> seen;
  for (const auto& s : plan.selections) {
    if (!seen.insert(s.id).second) {
      throw InvariantViolation(fmt::format("request {} selected twice", s.id));
    }
    const QueueEntry& e = find(s.id);
    if (s.reserve_tokens > 0) {
      const auto res = pool_.residency(s.id).value_or(Residency{});
      const std::int64_t stored =
          pool_.is_resident(s.id) ? res.tokens_stored : pool_.swapped_tokens(s.id).value_or(0);
      need += std::max<std::int64_t>(
          0, pool_.blocks_for(std::max({s.reserve_tokens, res.reserved_tokens,
                                        stored + s.chunk_len})) -
                 res.blocks_held);
    } else {
      need += entry_demand(e, s.chunk_len, pool_).blocks_needed;
    }
  }
  if (need > pool_.free_blocks()) {
    throw InvariantViolation(fmt::format(
        "plan needs {} blocks but only {} are free", need, pool_.free_blocks()));
  }

  for (const auto& s : plan.selections) {
    const QueueEntry& e = find(s.id);
    if (s.reserve_tokens > 0) pool_.reserve(s.id, s.reserve_tokens);
    if (auto saved = pool_.swapped_tokens(s.id)) {
      swap_tokens += *saved;
      if (auto it = preempted_at_.find(s.id); it != preempted_at_.end()) {
        stats_.observe_preemption_duration(start - it->second);
        preempted_at_.erase(it);
      }
    }
    try {
      pool_.allocate(s.id, entry_demand(e, s.chunk_len, pool_));
    } catch (const AllocationError& err) {
      throw InvariantViolation(err.what());
    }
  }
  const std::int64_t allocated = pool_.allocated_tokens();

  if (!plan.empty()) {
    clock_ += iteration_time(plan.forward_size, profile_) +
              cfg_.swap_cost_per_token_s * static_cast<double>(swap_tokens) +
              cfg_.sched_overhead_s;
  }
  const LongRelease release = policy_->config().long_release;
  std::vector<RequestId> finished;
  for (const auto& s : plan.selections) {
    QueueEntry& e = find(s.id);
    if (e.jct) {
      allowances.emplace_back(s.id, e.jct->effective_allowance());
      propagate_debt(*e.jct, start - e.enqueue_time);
    }
    if (s.is_prompt) {
      e.remaining_prompt -= s.chunk_len;
      e.seq_len += s.chunk_len;
      metrics_.on_chunk(s.id, s.chunk_len);
      stats_.observe_chunk(s.chunk_len);
      if (e.is_long) {
        if (e.remaining_prompt > 0 || release == LongRelease::JobDone) {
          active_long_.insert(s.id);
        } else {
          active_long_.erase(s.id);
        }
      }
    } else {
      e.seq_len += 1;
      stats_.observe_tg_step();
    }
    if (emit_token_on_final_chunk(s)) {
      ++e.generated;
      metrics_.on_token(s.id, clock_);
      emitted.push_back(s.id);
    }
    e.phase = e.remaining_prompt > 0 ? Phase::PromptPending : Phase::TgReady;
    e.enqueue_time = clock_;
    e.enqueue_seq = enqueue_seq_++;
    if (e.generated >= output_len_.at(s.id)) {
      pool_.release(s.id);
      metrics_.on_complete(s.id, clock_);
      active_long_.erase(s.id);
      if (e.jct) closed_ledgers_.emplace_back(s.id, *e.jct);
      output_len_.erase(s.id);
      finished.push_back(s.id);
    }
  }
  if (!finished.empty()) {
    std::unordered_set<RequestId> gone(finished.begin(), finished.end());
    std::erase_if(queue_, [&](const QueueEntry& e) { return gone.contains(e.id); });
  }
  if (!plan.empty()) {
    IterationRecord rec;
    rec.start_s = start;
    rec.end_s = clock_;
    rec.forward_size = plan.forward_size;
    rec.token_budget = plan.token_budget;
    rec.allocated_tokens = allocated;
    rec.total_tokens = pool_.total_tokens();
    rec.preemptions = static_cast<std::int64_t>(plan.preempted.size());
    metrics_.on_iteration(rec);
  }
}

MetricsReport Engine::run() {
  while (step()) {
  }
  auto rep = compute_metrics(metrics_, cfg_.goodput_window_s);
  rep.policy = policy_->config().display_name();
  rep.trace_id = trace_fingerprint(trace_);
  return rep;
}

MetricsReport run_simulation(const std::vector<RequestSpec>& trace,
                             const PolicyConfig& policy,
                             const ModelProfile& profile,
                             const EngineConfig& cfg) {
  Engine engine(trace, make_policy(policy), profile, cfg);
  return engine.run();
}

}  // namespace slosim
