// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "slosim/workload.h"

namespace slosim {

inline constexpr std::int64_t kDefaultBlockSize = 32;

struct KvcDemand {
  std::int64_t tokens_needed = 0;
  std::int64_t blocks_needed = 0;

  bool operator==(const KvcDemand&) const = default;
};

struct Residency {
  std::int64_t blocks_held = 0;
  std::int64_t tokens_stored = 0;
  // Capacity pinned up front by whole-sequence reservation (Orca style).
  std::int64_t reserved_tokens = 0;
};

// Paged KV-cache accounting. Capacity is tracked in whole blocks; a
// request always holds ceil(max(stored, reserved) / b) blocks.
//
// Single writer: the engine serializes every mutation.
class BlockPool {
 public:
  BlockPool(std::int64_t total_blocks, std::int64_t block_size);

  // floor(capacity_tokens / block_size) blocks. ConfigError when that is 0.
  static BlockPool from_capacity_tokens(std::int64_t capacity_tokens,
                                        std::int64_t block_size = kDefaultBlockSize);

  std::int64_t block_size() const { return block_size_; }
  std::int64_t total_blocks() const { return total_blocks_; }
  std::int64_t free_blocks() const { return total_blocks_ - held_blocks_; }
  std::int64_t held_blocks() const { return held_blocks_; }
  std::int64_t total_tokens() const { return total_blocks_ * block_size_; }
  std::int64_t free_tokens() const { return free_blocks() * block_size_; }
  // Allocated space in tokens, whole blocks counted.
  std::int64_t allocated_tokens() const { return held_blocks_ * block_size_; }

  std::int64_t blocks_for(std::int64_t tokens) const {
    return (tokens + block_size_ - 1) / block_size_;
  }

  bool is_resident(RequestId id) const { return resident_.contains(id); }
  bool is_swapped(RequestId id) const { return swapped_.contains(id); }
  bool knows(RequestId id) const { return is_resident(id) || is_swapped(id); }
  std::optional<Residency> residency(RequestId id) const;
  std::optional<std::int64_t> swapped_tokens(RequestId id) const;
  // Unused token slots in the request's last block (0 when not resident).
  std::int64_t headroom(RequestId id) const;
  std::size_t resident_count() const { return resident_.size(); }
  const std::unordered_map<RequestId, Residency>& residents() const {
    return resident_;
  }

  // Blocks required to append new_tokens for id. A swapped-out request must
  // first restore its saved tokens, so those count too.
  KvcDemand demand(RequestId id, std::int64_t new_tokens) const;

  // Applies a demand computed against the current state. Throws
  // AllocationError when blocks_needed exceeds free blocks.
  void allocate(RequestId id, const KvcDemand& dem);

  // Pins capacity for `tokens` without storing any. Used by whole-sequence
  // reservation; later appends within the reservation need no blocks.
  void reserve(RequestId id, std::int64_t tokens);

  // Frees every block of a resident request. StateError when unknown.
  void release(RequestId id);

  // Swaps a resident request out. Returns the saved token count.
  std::int64_t preempt(RequestId id);

  // Throws InvariantViolation on any accounting breach.
  void check_invariants() const;

 private:
  std::int64_t block_size_;
  std::int64_t total_blocks_;
  std::int64_t held_blocks_ = 0;
  std::unordered_map<RequestId, Residency> resident_;
  std::unordered_map<RequestId, std::int64_t> swapped_;
};

// Whole-batch reservation when every request pins the maximum sequence
// length: batch_size * max_seq_len tokens.
std::int64_t orca_reservation(std::int64_t batch_size, std::int64_t max_seq_len);

}  // namespace slosim
