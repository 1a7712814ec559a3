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

#ifndef BLOCKGIBBS_KERNELS_HPP
#define BLOCKGIBBS_KERNELS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "blockgibbs/data_model.hpp"
#include "blockgibbs/summation.hpp"

// O(n) row kernels. Everything the samplers do per row goes through here;
// per-level work is O(L_k) and lives in the samplers.
namespace blockgibbs {

inline constexpr std::size_t kDefaultRefreshCadence = 100;

// v[j] = effects[index[j]].
std::vector<double> gather(std::span<const double> effects, std::span<const LevelIndex> index);

// β · D ∘ ∏_f gather(B_f).
std::vector<double> predict_poisson(const ModelState& state, const ObservationTable& table);

// β + Σ_f gather(B_f) ∘ S_f.
std::vector<double> gauss_predict(const ModelState& state, const ObservationTable& table);

std::vector<double> predict(const ModelState& state, const ObservationTable& table);

// Recomputes Π from scratch and resets the amortization counter.
void refresh_prediction(ModelState& state, const ObservationTable& table);

// Π / gathered: the prediction with one family's effects removed.
std::vector<double> predict_excluding(std::span<const double> pi,
                                      std::span<const double> gathered);

std::vector<double> sum_by(std::span<const LevelIndex> index, std::span<const double> v,
                           std::size_t levels, Summation mode = Summation::exact);

// Replaces B_k by b_new and patches Π: multiplicatively by the per-level
// ratio (Poisson) or additively by the scaled difference (Gaussian). Every
// `cadence` calls Π is recomputed from scratch instead, bounding drift.
void apply_family_update(ModelState& state, std::size_t k, std::vector<double> b_new,
                         const ObservationTable& table,
                         std::size_t cadence = kDefaultRefreshCadence);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_KERNELS_HPP
