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

#ifndef BLOCKGIBBS_SIGMA_INFERENCE_HPP
#define BLOCKGIBBS_SIGMA_INFERENCE_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "blockgibbs/rng.hpp"

namespace blockgibbs {

using LogDensity = std::function<double(double)>;

// Candidate prior scales. The prior on σ is uniform over the grid points.
class SigmaGrid {
 public:
  // `count` points geometrically spaced over [lower, upper].
  static SigmaGrid geometric(double lower = 0.05, double upper = 5.0, std::size_t count = 40);
  static SigmaGrid fixed(double sigma);
  explicit SigmaGrid(std::vector<double> points);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double lower() const { return points_.front(); }
  double upper() const { return points_.back(); }

 private:
  std::vector<double> points_;
};

// Parses "lower:upper:count".
SigmaGrid parse_sigma_grid(std::string_view text);

enum class SigmaMethod { grid, mh };

SigmaMethod parse_sigma_method(std::string_view text);

struct SigmaSamplerConfig {
  SigmaMethod method = SigmaMethod::grid;
  SigmaGrid grid = SigmaGrid::geometric();
  // Random-walk scale on log σ; MH proposals outside the grid bounds are
  // rejected so both methods share the same support.
  double mh_step = 0.1;
};

// Draws one grid point with probability ∝ exp(log_marginal(σ)).
double griddy_draw(const LogDensity& log_marginal, const SigmaGrid& grid, RngStream& rng);

// Same as griddy_draw with the log-densities already evaluated.
std::size_t griddy_draw_index(std::span<const double> log_density, RngStream& rng);

// One random-walk Metropolis-Hastings step on λ = log σ under a flat prior on
// σ restricted to [lower, upper].
double mh_draw(double current, double step, const LogDensity& log_marginal, RngStream& rng,
               double lower = 0.0,
               double upper = std::numeric_limits<double>::infinity());

// Grid point maximizing the objective; ties go to the smallest σ.
double argmax_sigma(const LogDensity& objective, const SigmaGrid& grid);

// Dispatches on config.method.
double draw_sigma(double current, const LogDensity& log_marginal,
                  const SigmaSamplerConfig& config, RngStream& rng);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_SIGMA_INFERENCE_HPP
