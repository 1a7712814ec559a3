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

#ifndef BLOCKGIBBS_RNG_HPP
#define BLOCKGIBBS_RNG_HPP

#include <array>
#include <cstdint>
#include <span>

namespace blockgibbs {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Phases of a scan that draw random numbers. Together with the epoch (scan
// number), the family and the element (level key) they name a substream.
enum class StreamPhase : std::uint32_t {
  beta = 1,
  sigma = 2,
  effects = 3,
  data = 4,
  test = 255,
};

// Counter-based stream. The 128-bit Philox counter is laid out as
// (block, element, epoch, phase << 24 | family); the key is the seed.
// Distinct substream tags therefore never share a block.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint32_t element, std::uint32_t epoch,
            std::uint32_t phase_family);
  explicit RngStream(std::uint64_t seed) : RngStream(seed, 0, 0, 0) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Shape-rate parameterization: density ∝ x^(shape-1) exp(-rate x).
  double gamma(double shape, double rate);
  // Poisson count with the given mean (inversion below 10, PTRS above).
  std::uint64_t poisson(double mean);
  // Index drawn with probability proportional to `weights`.
  std::size_t categorical(std::span<const double> weights);
  // Same, from unnormalized log-weights (entries may be -inf).
  std::size_t categorical_log(std::span<const double> log_weights);

 private:
  double standard_gamma(double shape);
  void refill();

  PhiloxKey key_;
  PhiloxCounter ctr_;
  PhiloxCounter block_{};
  unsigned used_ = 4;
};

// Hands out substreams for a run. The epoch advances once per scan so every
// scan sees fresh, position-addressed randomness.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed) {}

  RngStream stream(StreamPhase phase, std::uint32_t family = 0,
                   std::uint32_t element = 0) const;

  std::uint64_t seed() const { return seed_; }
  std::uint32_t epoch() const { return epoch_; }
  void set_epoch(std::uint32_t epoch) { epoch_ = epoch; }
  void next_epoch() { ++epoch_; }

 private:
  std::uint64_t seed_;
  std::uint32_t epoch_ = 0;
};

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_RNG_HPP
