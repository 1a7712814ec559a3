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

#ifndef BLOCKGIBBS_GAUSSIAN_SAMPLER_HPP
#define BLOCKGIBBS_GAUSSIAN_SAMPLER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blockgibbs/data_model.hpp"
#include "blockgibbs/sampler_common.hpp"

namespace blockgibbs {

// invvar_t = Σ S²D and error_t = Σ (Y - Π + gather(B_k) S) S D over the
// rows of level t. Π must be the current full prediction.
FamilySuffStats gaussian_suff_stats(std::size_t k, const ObservationTable& table,
                                    const ModelState& state,
                                    Summation mode = Summation::exact);

// Σ_t ½ log(σ^-2 / (invvar_t + σ^-2)) + ½ error_t² / (invvar_t + σ^-2).
double log_gauss_marginal(double sigma, const FamilySuffStats& stats);

// B_kt ~ N(error_t / (invvar_t + σ^-2), (invvar_t + σ^-2)^-1/2).
std::vector<double> sample_b_family_gauss(double sigma, const FamilySuffStats& stats,
                                          const LevelStreams& streams);

// Conjugate normal update of the intercept; `prior_precision` 0 is flat.
// Π is shifted by β_new - β.
void sample_beta_gauss(const ObservationTable& table, ModelState& state, RngStream& rng,
                       double prior_precision = 0.0);

class GaussianSampler {
 public:
  GaussianSampler(const ObservationTable& table, const FamilyLayout& layout,
                  ScanConfig config = {});

  ScanRecord scan(ModelState& state, RandomSource& rng) const;
  FamilySuffStats stats(std::size_t k, const ModelState& state) const;

  const ScanConfig& config() const { return config_; }

 private:
  const ObservationTable& table_;
  const FamilyLayout& layout_;
  ScanConfig config_;
  std::vector<std::vector<std::uint32_t>> keys_;
  std::vector<std::vector<double>> invvar_;
  double sum_d_ = 0.0;
};

ScanRecord gaussian_scan(ModelState& state, const ObservationTable& table,
                         const FamilyLayout& layout, const ScanConfig& config,
                         RandomSource& rng);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_GAUSSIAN_SAMPLER_HPP
