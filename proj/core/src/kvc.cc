// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/kvc.h"

#include <fmt/format.h>

#include <algorithm>

#include "slosim/errors.h"

namespace slosim {

BlockPool::BlockPool(std::int64_t total_blocks, std::int64_t block_size)
    : block_size_(block_size), total_blocks_(total_blocks) {
  if (block_size_ < 1) throw ConfigError("block_size must be >= 1");
  if (total_blocks_ < 1) throw ConfigError("KV cache must hold >= 1 block");
}

BlockPool BlockPool::from_capacity_tokens(std::int64_t capacity_tokens,
                                          std::int64_t block_size) {
  if (block_size < 1) throw ConfigError("block_size must be >= 1");
  return BlockPool(capacity_tokens / block_size, block_size);
}

std::optional<Residency> BlockPool::residency(RequestId id) const {
  auto it = resident_.find(id);
  if (it == resident_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> BlockPool::swapped_tokens(RequestId id) const {
  auto it = swapped_.find(id);
  if (it == swapped_.end()) return std::nullopt;
  return it->second;
}

std::int64_t BlockPool::headroom(RequestId id) const {
  auto it = resident_.find(id);
  if (it == resident_.end()) return 0;
  const auto& r = it->second;
  return r.blocks_held * block_size_ - r.tokens_stored;
}

KvcDemand BlockPool::demand(RequestId id, std::int64_t new_tokens) const {
  std::int64_t stored = 0;
  std::int64_t reserved = 0;
  std::int64_t held = 0;
  if (auto it = resident_.find(id); it != resident_.end()) {
    stored = it->second.tokens_stored;
    reserved = it->second.reserved_tokens;
    held = it->second.blocks_held;
  } else if (auto sw = swapped_.find(id); sw != swapped_.end()) {
    stored = sw->second;
  }
  const std::int64_t need =
      blocks_for(std::max(stored + new_tokens, reserved)) - held;
  return KvcDemand{new_tokens, std::max<std::int64_t>(0, need)};
}

void BlockPool::allocate(RequestId id, const KvcDemand& dem) {
  if (dem.blocks_needed > free_blocks()) {
    throw AllocationError(fmt::format(
        "request {} needs {} blocks, {} free", id, dem.blocks_needed,
        free_blocks()));
  }
  auto& r = resident_[id];
  if (auto sw = swapped_.find(id); sw != swapped_.end()) {
    r.tokens_stored = sw->second;
    swapped_.erase(sw);
  }
  const std::int64_t stored = r.tokens_stored + dem.tokens_needed;
  const std::int64_t blocks = r.blocks_held + dem.blocks_needed;
  if (blocks * block_size_ < std::max(stored, r.reserved_tokens)) {
    throw StateError(fmt::format(
        "stale demand for request {}: {} blocks cannot hold {} tokens", id,
        blocks, stored));
  }
  r.tokens_stored = stored;
  r.blocks_held = blocks;
  held_blocks_ += dem.blocks_needed;
}

void BlockPool::reserve(RequestId id, std::int64_t tokens) {
  if (is_swapped(id)) {
    throw StateError(fmt::format("request {} is swapped out", id));
  }
  auto& r = resident_[id];
  const std::int64_t target = std::max(tokens, r.reserved_tokens);
  const std::int64_t need =
      std::max<std::int64_t>(0, blocks_for(std::max(target, r.tokens_stored)) -
                                    r.blocks_held);
  if (need > free_blocks()) {
    if (r.blocks_held == 0) resident_.erase(id);
    throw AllocationError(fmt::format(
        "request {} reservation needs {} blocks, {} free", id, need,
        free_blocks()));
  }
  r.reserved_tokens = target;
  r.blocks_held += need;
  held_blocks_ += need;
}

void BlockPool::release(RequestId id) {
  auto it = resident_.find(id);
  if (it == resident_.end()) {
    throw StateError(fmt::format("release of non-resident request {}", id));
  }
  held_blocks_ -= it->second.blocks_held;
  resident_.erase(it);
}

std::int64_t BlockPool::preempt(RequestId id) {
  auto it = resident_.find(id);
  if (it == resident_.end()) {
    throw StateError(fmt::format("preempt of non-resident request {}", id));
  }
  const std::int64_t tokens = it->second.tokens_stored;
  held_blocks_ -= it->second.blocks_held;
  resident_.erase(it);
  swapped_.emplace(id, tokens);
  return tokens;
}

void BlockPool::check_invariants() const {
  std::int64_t sum = 0;
  for (const auto& [id, r] : resident_) {
    sum += r.blocks_held;
    const std::int64_t span = std::max(r.tokens_stored, r.reserved_tokens);
    if (r.blocks_held < 0 || r.tokens_stored < 0) {
      throw InvariantViolation(fmt::format("negative residency for {}", id));
    }
    if (r.blocks_held > 0 && !((r.blocks_held - 1) * block_size_ < span &&
                               span <= r.blocks_held * block_size_)) {
      throw InvariantViolation(fmt::format(
          "request {} holds {} blocks for {} tokens", id, r.blocks_held, span));
    }
    if (swapped_.contains(id)) {
      throw InvariantViolation(
          fmt::format("request {} both resident and swapped", id));
    }
  }
  if (sum != held_blocks_) {
    throw InvariantViolation("held block counter out of sync");
  }
  if (free_blocks() < 0) throw InvariantViolation("negative free blocks");
}

std::int64_t orca_reservation(std::int64_t batch_size,
                              std::int64_t max_seq_len) {
  return batch_size * max_seq_len;
}

}  // namespace slosim
