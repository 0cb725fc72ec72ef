// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "slosim/engine.h"
#include "slosim/kvc.h"
#include "slosim/policies.h"

namespace {

using namespace slosim;

void BM_SelectRequests(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> len(1, 2048);
  std::vector<Candidate> cands;
  for (std::size_t k = 0; k < static_cast<std::size_t>(state.range(0)); ++k) {
    Candidate c;
    c.key = k;
    c.chunkable = k % 3 != 0;
    c.tokens = c.chunkable ? len(rng) : 1;
    c.memory = c.chunkable ? 0 : 32 * (k % 2);
    cands.push_back(c);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_requests(768, 1 << 16, cands, 32, 1));
  }
}
BENCHMARK(BM_SelectRequests)->Arg(16)->Arg(128)->Arg(1024);

void BM_BlockPoolSteps(benchmark::State& state) {
  for (auto _ : state) {
    BlockPool pool(4096, 32);
    for (RequestId id = 0; id < 256; ++id) pool.allocate(id, pool.demand(id, 100));
    for (int step = 0; step < 64; ++step) {
      for (RequestId id = 0; id < 256; ++id) pool.allocate(id, pool.demand(id, 1));
    }
    benchmark::DoNotOptimize(pool.free_blocks());
  }
}
BENCHMARK(BM_BlockPoolSteps);

void BM_Simulation(benchmark::State& state) {
  TraceConfig cfg;
  cfg.num_requests = 200;
  cfg.long_len_dist = LengthDist::log_uniform(4096, 16000);
  const auto profile = ModelProfile::opt13b();
  const auto trace = generate_trace(cfg, profile);
  PolicyConfig pc;
  pc.kind = static_cast<PolicyKind>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_simulation(trace, pc, profile));
  }
  state.SetLabel(std::string(to_string(pc.kind)));
}
BENCHMARK(BM_Simulation)
    ->DenseRange(0, 3)
    ->Unit(benchmark::kMillisecond)
    ->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
