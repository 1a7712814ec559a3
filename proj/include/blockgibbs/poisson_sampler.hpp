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

#ifndef BLOCKGIBBS_POISSON_SAMPLER_HPP
#define BLOCKGIBBS_POISSON_SAMPLER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "blockgibbs/data_model.hpp"
#include "blockgibbs/sampler_common.hpp"

namespace blockgibbs {

// events = SumBy_k(Y), pevents = SumBy_k(Π / gather(B_k)).
FamilySuffStats poisson_suff_stats(std::size_t k, const ObservationTable& table,
                                   const ModelState& state,
                                   Summation mode = Summation::exact);

// Log of one level's factor C(a, a) / C(a + events, a + pevents), a = σ^-2.
double log_conjugate_level(double sigma, double events, double pevents);

// Σ_t log_conjugate_level: the log marginal likelihood of the family with its
// effects integrated out, up to the constant that does not involve σ.
double log_conjugate_marginal(double sigma, const FamilySuffStats& stats);

// B_kt ~ Gamma(events_t + σ^-2, pevents_t + σ^-2), independently per level.
std::vector<double> sample_b_family(double sigma, const FamilySuffStats& stats,
                                    const LevelStreams& streams);

// Spike at 1 with weight w, conjugate Gamma slab with weight 1 - w.
double spike_slab_log_marginal(double w, double sigma, const FamilySuffStats& stats);

std::vector<double> spike_slab_sample_b(double w, double sigma, const FamilySuffStats& stats,
                                        const LevelStreams& streams);

// Joint (w, σ) draw over weight_grid × sigma grid, uniform prior on the grid.
std::pair<double, double> draw_spike_slab_hyper(const FamilySuffStats& stats,
                                                std::span<const double> weight_grid,
                                                const SigmaGrid& sigma_grid, RngStream& rng);

// β ~ Gamma(1 + ΣY, 1 + ΣΠ/β) under a Gamma(1, 1) prior; Π is rescaled.
void sample_beta(const ObservationTable& table, ModelState& state, RngStream& rng);

// Blocked Gibbs sampler for the Gamma-Poisson model. Holds per-family
// caches (event totals, level stream keys) that are fixed by the data.
class PoissonSampler {
 public:
  PoissonSampler(const ObservationTable& table, const FamilyLayout& layout,
                 std::vector<PriorSpec> priors = {}, ScanConfig config = {});

  // One full scan: refresh Π, update β, then for each family draw σ_f with
  // B_f integrated out, draw B_f given σ_f and patch Π. Advances the epoch.
  ScanRecord scan(ModelState& state, RandomSource& rng) const;

  FamilySuffStats stats(std::size_t k, const ModelState& state) const;
  // Draws B_k given σ_k (and w_k) and applies the update to Π.
  void update_effects(std::size_t k, ModelState& state, const FamilySuffStats& stats,
                      const RandomSource& rng) const;

  const ObservationTable& table() const { return table_; }
  const FamilyLayout& layout() const { return layout_; }
  const ScanConfig& config() const { return config_; }
  const std::vector<PriorSpec>& priors() const { return priors_; }
  std::span<const std::uint32_t> stream_keys(std::size_t k) const { return keys_[k]; }
  double total_events() const { return total_events_; }

 private:
  const ObservationTable& table_;
  const FamilyLayout& layout_;
  std::vector<PriorSpec> priors_;
  ScanConfig config_;
  std::vector<std::vector<std::uint32_t>> keys_;
  std::vector<std::vector<double>> events_;
  double total_events_ = 0.0;
};

ScanRecord poisson_scan(ModelState& state, const ObservationTable& table,
                        const FamilyLayout& layout, const std::vector<PriorSpec>& priors,
                        const ScanConfig& config, RandomSource& rng);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_POISSON_SAMPLER_HPP
