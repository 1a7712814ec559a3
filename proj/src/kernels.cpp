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

#include "blockgibbs/kernels.hpp"

#include <stdexcept>
#include <utility>

namespace blockgibbs {

std::vector<double> gather(std::span<const double> effects, std::span<const LevelIndex> index) {
  std::vector<double> out(index.size());
  for (std::size_t j = 0; j < index.size(); ++j) out[j] = effects[index[j]];
  return out;
}

std::vector<double> predict_poisson(const ModelState& state, const ObservationTable& table) {
  const std::size_t n = table.rows();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = state.beta * table.d[j];
  for (std::size_t f = 0; f < table.families(); ++f) {
    const auto& effects = state.b[f];
    const auto& index = table.index[f];
    for (std::size_t j = 0; j < n; ++j) out[j] *= effects[index[j]];
  }
  return out;
}

std::vector<double> gauss_predict(const ModelState& state, const ObservationTable& table) {
  const std::size_t n = table.rows();
  std::vector<double> out(n, state.beta);
  for (std::size_t f = 0; f < table.families(); ++f) {
    const auto& effects = state.b[f];
    const auto& index = table.index[f];
    if (table.scale) {
      const auto& s = (*table.scale)[f];
      for (std::size_t j = 0; j < n; ++j) out[j] += effects[index[j]] * s[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) out[j] += effects[index[j]];
    }
  }
  return out;
}

std::vector<double> predict(const ModelState& state, const ObservationTable& table) {
  return table.kind == ModelKind::poisson ? predict_poisson(state, table)
                                          : gauss_predict(state, table);
}

void refresh_prediction(ModelState& state, const ObservationTable& table) {
  state.pi = predict(state, table);
  state.refresh_counter = 0;
}

std::vector<double> predict_excluding(std::span<const double> pi,
                                      std::span<const double> gathered) {
  if (pi.size() != gathered.size()) throw std::invalid_argument("length mismatch");
  std::vector<double> out(pi.size());
  for (std::size_t j = 0; j < pi.size(); ++j) out[j] = pi[j] / gathered[j];
  return out;
}

std::vector<double> sum_by(std::span<const LevelIndex> index, std::span<const double> v,
                           std::size_t levels, Summation mode) {
  if (index.size() != v.size()) throw std::invalid_argument("length mismatch");
  return grouped_sum(index, levels, mode, [v](std::size_t j) { return v[j]; });
}

void apply_family_update(ModelState& state, std::size_t k, std::vector<double> b_new,
                         const ObservationTable& table, std::size_t cadence) {
  auto& b_old = state.b.at(k);
  if (b_new.size() != b_old.size()) throw std::invalid_argument("effect vector length changed");

  if (++state.refresh_counter >= cadence) {
    b_old = std::move(b_new);
    refresh_prediction(state, table);
    return;
  }

  const auto& index = table.index[k];
  const std::size_t n = table.rows();
  auto& pi = state.pi;
  if (table.kind == ModelKind::poisson) {
    std::vector<double> ratio(b_old.size());
    for (std::size_t t = 0; t < ratio.size(); ++t) ratio[t] = b_new[t] / b_old[t];
    for (std::size_t j = 0; j < n; ++j) pi[j] *= ratio[index[j]];
  } else {
    std::vector<double> delta(b_old.size());
    for (std::size_t t = 0; t < delta.size(); ++t) delta[t] = b_new[t] - b_old[t];
    if (table.scale) {
      const auto& s = (*table.scale)[k];
      for (std::size_t j = 0; j < n; ++j) pi[j] += delta[index[j]] * s[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) pi[j] += delta[index[j]];
    }
  }
  b_old = std::move(b_new);
}

}  // namespace blockgibbs
