// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#include "slosim/workload.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "slosim/errors.h"

namespace slosim {

namespace {

// Distribution objects in <random> are implementation-defined; drawing from
// the raw engine keeps traces identical across standard libraries.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

  double exponential(double rate) { return -std::log1p(-unit()) / rate; }

  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit() * n));
  }

  std::int64_t length(const LengthDist& d) {
    switch (d.kind) {
      case LengthDist::Kind::Uniform:
        return d.lo + static_cast<std::int64_t>(index(
                          static_cast<std::size_t>(d.hi - d.lo + 1)));
      case LengthDist::Kind::LogUniform: {
        const double v = std::exp(uniform(std::log(static_cast<double>(d.lo)),
                                          std::log(static_cast<double>(d.hi) + 1.0)));
        return std::clamp(static_cast<std::int64_t>(v), d.lo, d.hi);
      }
      case LengthDist::Kind::Choice:
        return d.values[index(d.values.size())];
    }
    return d.lo;
  }

  double scale(const ScaleDist& s) {
    if (!s.set.empty()) return s.set[index(s.set.size())];
    return uniform(s.lo, s.hi);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

SloSpec SloSpec::online(double ttft_s, double tbt_s) {
  return SloSpec{SloKind::Online, ttft_s, tbt_s, 0.0};
}

SloSpec SloSpec::offline(double jct_s) {
  return SloSpec{SloKind::Offline, 0.0, 0.0, jct_s};
}

void SloSpec::validate() const {
  if (kind == SloKind::Online) {
    if (!(ttft_s > 0.0)) throw ValidationError("ttft must be > 0", "slo.ttft");
    if (!(tbt_s > 0.0)) throw ValidationError("tbt must be > 0", "slo.tbt");
    if (jct_s != 0.0) {
      throw ValidationError("online SLO must not carry jct", "slo.jct");
    }
  } else {
    if (!(jct_s > 0.0)) throw ValidationError("jct must be > 0", "slo.jct");
    if (ttft_s != 0.0 || tbt_s != 0.0) {
      throw ValidationError("offline SLO must not carry ttft/tbt",
                            ttft_s != 0.0 ? "slo.ttft" : "slo.tbt");
    }
  }
}

void RequestSpec::validate() const {
  if (prompt_len < 1) throw ValidationError("prompt must be >= 1", "prompt_len");
  if (output_len < 1) throw ValidationError("output must be >= 1", "output_len");
  if (predicted_output_len < 1) {
    throw ValidationError("predicted output must be >= 1",
                          "predicted_output_len");
  }
  if (!(arrival_s >= 0.0)) {
    throw ValidationError("arrival must be >= 0", "arrival_time");
  }
  slo.validate();
}

LengthDist LengthDist::uniform(std::int64_t lo, std::int64_t hi) {
  return {Kind::Uniform, lo, hi, {}};
}

LengthDist LengthDist::log_uniform(std::int64_t lo, std::int64_t hi) {
  return {Kind::LogUniform, lo, hi, {}};
}

LengthDist LengthDist::choice(std::vector<std::int64_t> values) {
  return {Kind::Choice, 0, 0, std::move(values)};
}

void LengthDist::validate(const char* name) const {
  if (kind == Kind::Choice) {
    if (values.empty()) throw ConfigError(fmt::format("{} is empty", name));
    for (auto v : values) {
      if (v < 1) throw ConfigError(fmt::format("{} has a length < 1", name));
    }
    return;
  }
  if (lo < 1 || hi < lo) {
    throw ConfigError(fmt::format("{} needs 1 <= lo <= hi", name));
  }
}

void ScaleDist::validate(const char* name) const {
  if (!set.empty()) {
    for (double v : set) {
      if (!(v > 0.0)) throw ConfigError(fmt::format("{} has a scale <= 0", name));
    }
    return;
  }
  if (!(lo > 0.0) || hi < lo) {
    throw ConfigError(fmt::format("{} needs 0 < lo <= hi", name));
  }
}

void TraceConfig::validate() const {
  if (num_requests < 0) throw ConfigError("num_requests must be >= 0");
  if (!(arrival_rate > 0.0)) throw ConfigError("arrival_rate must be > 0");
  if (!(long_fraction >= 0.0 && long_fraction <= 1.0)) {
    throw ConfigError("long_fraction must be in [0, 1]");
  }
  if (!(offline_fraction >= 0.0 && offline_fraction <= 1.0)) {
    throw ConfigError("offline_fraction must be in [0, 1]");
  }
  if (!(prediction_noise >= 0.0 && prediction_noise < 1.0)) {
    throw ConfigError("prediction_noise must be in [0, 1)");
  }
  if (long_prompt_threshold < 1) {
    throw ConfigError("long_prompt_threshold must be >= 1");
  }
  if (short_len_dists.empty()) throw ConfigError("short_len_dists is empty");
  for (const auto& d : short_len_dists) d.validate("short_len_dist");
  long_len_dist.validate("long_len_dist");
  output_len_dist.validate("output_len_dist");
  ttft_scale.validate("ttft_scale");
  tbt_scale.validate("tbt_scale");
  jct_scale.validate("jct_scale");
}

double bucket_prefill_latency(std::int64_t prompt_len,
                              const ModelProfile& profile) {
  constexpr std::int64_t kBucket = 512;
  const std::int64_t upper = ((std::max<std::int64_t>(prompt_len, 1) + kBucket - 1) /
                              kBucket) * kBucket;
  return iteration_time(upper, profile);
}

std::vector<RequestSpec> generate_trace(const TraceConfig& cfg,
                                        const ModelProfile& profile) {
  cfg.validate();
  profile.validate();
  Sampler rng(cfg.seed);
  std::vector<RequestSpec> trace;
  trace.reserve(static_cast<std::size_t>(cfg.num_requests));
  double clock = 0.0;
  for (std::int64_t i = 0; i < cfg.num_requests; ++i) {
    clock += rng.exponential(cfg.arrival_rate);
    RequestSpec r;
    r.id = i;
    r.arrival_s = clock;
    if (rng.bernoulli(cfg.long_fraction)) {
      r.prompt_len = std::max(rng.length(cfg.long_len_dist),
                              cfg.long_prompt_threshold);
    } else {
      const auto& d = cfg.short_len_dists[rng.index(cfg.short_len_dists.size())];
      r.prompt_len = std::min(rng.length(d), cfg.long_prompt_threshold - 1);
      r.prompt_len = std::max<std::int64_t>(r.prompt_len, 1);
    }
    r.output_len = rng.length(cfg.output_len_dist);
    const double noise = rng.uniform(1.0 - cfg.prediction_noise,
                                     1.0 + cfg.prediction_noise);
    r.predicted_output_len = cfg.prediction_noise == 0.0
        ? r.output_len
        : std::max<std::int64_t>(
              1, std::llround(static_cast<double>(r.output_len) * noise));
    const double base_ttft = bucket_prefill_latency(r.prompt_len, profile);
    const double ttft_scale = rng.scale(cfg.ttft_scale);
    const double tbt_scale = rng.scale(cfg.tbt_scale);
    const double jct_scale = rng.scale(cfg.jct_scale);
    if (rng.bernoulli(cfg.offline_fraction)) {
      const double base_jct =
          base_ttft + static_cast<double>(r.output_len) * kReadingSpeedTbtS;
      r.slo = SloSpec::offline(base_jct * jct_scale);
    } else {
      r.slo = SloSpec::online(base_ttft * ttft_scale,
                              kReadingSpeedTbtS * tbt_scale);
    }
    trace.push_back(r);
  }
  return trace;
}

}  // namespace slosim
