// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "slosim/policies.h"

namespace slosim::detail {

std::unique_ptr<Policy> make_accelgen(const PolicyConfig& cfg);
std::unique_ptr<Policy> make_paged_fcfs(const PolicyConfig& cfg);
std::unique_ptr<Policy> make_static_chunk(const PolicyConfig& cfg);
std::unique_ptr<Policy> make_orca_fcfs(const PolicyConfig& cfg);

}  // namespace slosim::detail
