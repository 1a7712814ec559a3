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

#ifndef BLOCKGIBBS_MCEM_HPP
#define BLOCKGIBBS_MCEM_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "blockgibbs/poisson_sampler.hpp"

// Monte Carlo EM for the Gamma-Poisson model: effects are sampled with σ
// held fixed, then each σ_k is set to the grid maximizer of the conjugate
// marginal with B_k integrated out.
namespace blockgibbs {

struct McemConfig {
  // Inner Gibbs passes per family in the blocked variant.
  std::size_t inner_samples = 5;
  std::size_t max_iterations = 200;
  // Finer than the sampling grid: the M-step can only return grid points.
  SigmaGrid grid = SigmaGrid::geometric(0.05, 5.0, 400);
  // Stop once max_k |Δσ_k| / σ_k falls below this over an outer iteration.
  double tolerance = 1e-3;
};

enum class McemVariant { blocked, minimal };

// One outer iteration of the blocked variant. For each family k: T passes
// that resample every family's effects, recording pevents for k after each;
// σ_k maximizes Σ_s log PriorMarginal(σ, events, pevents^(s)). Then
// β ← β ΣY / ΣΠ.
ScanRecord mcem_scan(const PoissonSampler& sampler, ModelState& state,
                     const McemConfig& config, RandomSource& rng);

// One iteration of the single-sample variant: per family, σ_k from the
// current statistics, then one draw of B_k; β ratio update at the end.
ScanRecord minimal_mcem_scan(const PoissonSampler& sampler, ModelState& state,
                             const McemConfig& config, RandomSource& rng);

// β ← β ΣY / ΣΠ, with Π rescaled to match.
void beta_ratio_update(ModelState& state, double total_events);

struct McemResult {
  std::vector<ScanRecord> trajectory;
  bool converged = false;
};

McemResult run_mcem(const PoissonSampler& sampler, ModelState& state, const McemConfig& config,
                    McemVariant variant, RandomSource& rng,
                    const std::function<void(std::size_t, const ScanRecord&)>& on_iteration = {});

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_MCEM_HPP
