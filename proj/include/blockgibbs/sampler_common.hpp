/*
 * Copyright 2026 The blockgibbs Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BLOCKGIBBS_SAMPLER_COMMON_HPP
#define BLOCKGIBBS_SAMPLER_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blockgibbs/kernels.hpp"
#include "blockgibbs/rng.hpp"
#include "blockgibbs/sigma_inference.hpp"
#include "blockgibbs/summation.hpp"

namespace blockgibbs {

struct ScanConfig {
  SigmaSamplerConfig sigma;
  std::size_t refresh_cadence = kDefaultRefreshCadence;
  Summation summation = Summation::exact;
  // Precision of the N(0, 1/precision) prior on the Gaussian intercept;
  // 0 gives the flat prior.
  double beta_prior_precision = 0.0;
  // Fault-injection hook for sampler self-tests: scales the second family
  // statistic (pevents or invvar) before use. Must stay 1 for real fits.
  double stats_fault = 1.0;
};

// Parameters after one scan.
struct ScanRecord {
  double beta = 0.0;
  std::vector<double> sigma;
  std::vector<double> spike_weight;
};

ScanRecord record_of(const ModelState& state);

// One stream per level of a family, addressed by the level's stream key so
// the draw a level receives does not depend on its position in the layout.
class LevelStreams {
 public:
  LevelStreams(const RandomSource& source, std::uint32_t family,
               std::span<const std::uint32_t> keys = {})
      : source_(source), family_(family), keys_(keys) {}

  RngStream operator()(std::size_t t) const {
    const auto element = keys_.empty() ? static_cast<std::uint32_t>(t) : keys_[t];
    return source_.stream(StreamPhase::effects, family_, element);
  }

 private:
  RandomSource source_;
  std::uint32_t family_;
  std::span<const std::uint32_t> keys_;
};

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_SAMPLER_COMMON_HPP
