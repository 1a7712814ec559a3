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

#ifndef BLOCKGIBBS_DIAGNOSTICS_HPP
#define BLOCKGIBBS_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "blockgibbs/data_model.hpp"
#include "blockgibbs/sigma_inference.hpp"

namespace blockgibbs {

// Column-per-parameter draw store. The first `burn_in` rows are discarded
// by summaries.
struct Trace {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<std::size_t> iterations;
  std::size_t burn_in = 0;

  explicit Trace(std::vector<std::string> parameter_names = {});
  void append(std::size_t iteration, std::span<const double> values);
  std::size_t length() const { return iterations.size(); }
};

// Effective sample size n / (1 + 2 Σ ρ_t), truncating the autocorrelation
// sum with Geyer's initial positive sequence. A constant series has ESS n.
double ess(std::span<const double> series);

// Sample quantile by linear interpolation between order statistics
// (h = (n - 1) p). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);

struct ParameterSummary {
  std::string name;
  double mean;
  double sd;
  double q025;
  double q50;
  double q975;
  double ess;  // NaN when fewer than 10 draws
};

std::vector<ParameterSummary> summarize(const Trace& trace);

struct GewekeConfig {
  ModelKind model = ModelKind::poisson;
  std::size_t rows = 200;
  std::vector<std::size_t> levels{10, 10};
  std::size_t draws = 20000;
  std::uint64_t seed = 20260101;
  // σ prior: uniform over these points.
  SigmaGrid grid = SigmaGrid::geometric(0.2, 2.0, 12);
  // Gaussian intercept prior N(0, 1 / precision).
  double beta_prior_precision = 1.0;
  // Passed to the sampler's fault hook; 1 means a correct sampler.
  double stats_fault = 1.0;
};

struct GewekeStatistic {
  std::string name;
  double marginal_mean;
  double successive_mean;
  double z;
};

// Compares the joint distribution of (parameters, data) reached by
// independent prior-then-data simulation against the one reached by
// alternating sampler scans with data regeneration. Each z-score is
// asymptotically N(0, 1) for a correct sampler.
std::vector<GewekeStatistic> geweke_check(const GewekeConfig& config);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_DIAGNOSTICS_HPP
