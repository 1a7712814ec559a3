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

#include "blockgibbs/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "blockgibbs/kernels.hpp"
#include "blockgibbs/summation.hpp"

namespace blockgibbs {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::poisson ? "poisson" : "gaussian";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "poisson") return ModelKind::poisson;
  if (text == "gaussian") return ModelKind::gaussian;
  throw std::invalid_argument(fmt::format("unknown model kind '{}'", text));
}

FamilyLayout FamilyLayout::with_level_counts(std::vector<std::string> names,
                                             std::span<const std::size_t> levels) {
  if (names.size() != levels.size()) {
    throw std::invalid_argument("family names and level counts differ in length");
  }
  FamilyLayout layout;
  for (std::size_t k = 0; k < names.size(); ++k) {
    layout.add_family(std::move(names[k]));
    for (std::size_t t = 0; t < levels[k]; ++t) layout.encode(k, std::to_string(t + 1));
  }
  return layout;
}

std::size_t FamilyLayout::add_family(std::string name) {
  names_.push_back(std::move(name));
  labels_.emplace_back();
  lookup_.emplace_back();
  return names_.size() - 1;
}

LevelIndex FamilyLayout::encode(std::size_t k, std::string_view label) {
  auto& lookup = lookup_.at(k);
  auto [it, inserted] =
      lookup.try_emplace(std::string(label), static_cast<LevelIndex>(labels_[k].size()));
  if (inserted) labels_[k].emplace_back(label);
  return it->second;
}

std::optional<LevelIndex> FamilyLayout::find(std::size_t k, std::string_view label) const {
  const auto& lookup = lookup_.at(k);
  auto it = lookup.find(std::string(label));
  if (it == lookup.end()) return std::nullopt;
  return it->second;
}

const std::string& FamilyLayout::decode(std::size_t k, LevelIndex t) const {
  return labels_.at(k).at(t);
}

std::size_t FamilyLayout::offset(std::size_t k) const {
  std::size_t total = 0;
  for (std::size_t f = 0; f < k; ++f) total += labels_[f].size();
  return total;
}

std::vector<std::uint32_t> FamilyLayout::stream_keys(std::size_t k) const {
  const auto& labels = labels_.at(k);
  std::vector<std::uint32_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return labels[a] < labels[b]; });
  std::vector<std::uint32_t> keys(labels.size());
  for (std::uint32_t rank = 0; rank < order.size(); ++rank) keys[order[rank]] = rank;
  return keys;
}

PriorSpec PriorSpec::spike_slab(std::size_t grid_points) {
  PriorSpec prior;
  prior.kind = PriorKind::spike_slab;
  if (grid_points < 2) throw std::invalid_argument("spike weight grid needs >= 2 points");
  prior.weight_grid.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    prior.weight_grid[i] = static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  return prior;
}

std::vector<Violation> validate(const ObservationTable& table, const FamilyLayout& layout) {
  std::vector<Violation> out;
  const std::size_t n = table.rows();
  const std::size_t families = layout.num_families();
  if (table.d.size() != n) {
    out.push_back({Violation::npos, "offset column length differs from response length"});
    return out;
  }
  if (table.index.size() != families) {
    out.push_back({Violation::npos,
                   fmt::format("index has {} columns but layout has {} families",
                               table.index.size(), families)});
    return out;
  }
  for (std::size_t k = 0; k < families; ++k) {
    if (table.index[k].size() != n) {
      out.push_back({Violation::npos, fmt::format("index column {} has wrong length", k + 1)});
      return out;
    }
  }
  if (table.kind == ModelKind::poisson && table.scale) {
    out.push_back({Violation::npos, "scale matrix is only supported for Gaussian models"});
  }
  if (table.scale) {
    if (table.scale->size() != families) {
      out.push_back({Violation::npos, "scale matrix column count differs from family count"});
      return out;
    }
    for (const auto& column : *table.scale) {
      if (column.size() != n) {
        out.push_back({Violation::npos, "scale column has wrong length"});
        return out;
      }
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    const double d = table.d[j];
    if (!(d > 0.0) || !std::isfinite(d)) {
      out.push_back({j, fmt::format("nonpositive offset {}", d)});
    }
    const double y = table.y[j];
    if (!std::isfinite(y)) {
      out.push_back({j, "non-finite response"});
    } else if (table.kind == ModelKind::poisson) {
      if (y < 0.0) {
        out.push_back({j, fmt::format("negative count {}", y)});
      } else if (y != std::floor(y)) {
        out.push_back({j, fmt::format("non-integer count {}", y)});
      }
    }
    for (std::size_t k = 0; k < families; ++k) {
      const LevelIndex t = table.index[k][j];
      if (t >= layout.num_levels(k)) {
        out.push_back({j, fmt::format("family {} level index {} outside 1..{}", k + 1, t + 1,
                                      layout.num_levels(k))});
      }
      if (table.scale && !std::isfinite((*table.scale)[k][j])) {
        out.push_back({j, fmt::format("non-finite scale in family {}", k + 1)});
      }
    }
  }
  return out;
}

std::vector<Violation> validate(const PriorSpec& prior) {
  std::vector<Violation> out;
  if (prior.kind == PriorKind::conjugate) return out;
  if (prior.spike_location != 1.0) {
    out.push_back({Violation::npos, "only a spike at effect 1.0 is supported"});
  }
  if (prior.weight_grid.empty()) out.push_back({Violation::npos, "empty spike weight grid"});
  for (double w : prior.weight_grid) {
    if (!(w >= 0.0 && w <= 1.0)) {
      out.push_back({Violation::npos, fmt::format("spike weight {} outside [0, 1]", w)});
    }
  }
  return out;
}

ModelState initial_state(const ObservationTable& table, const FamilyLayout& layout,
                         double initial_sigma) {
  ModelState state;
  const std::size_t families = layout.num_families();
  const double neutral = table.kind == ModelKind::poisson ? 1.0 : 0.0;
  state.b.resize(families);
  for (std::size_t k = 0; k < families; ++k) state.b[k].assign(layout.num_levels(k), neutral);
  state.sigma.assign(families, initial_sigma);
  state.spike_weight.assign(families, 0.0);

  const double sum_d = exact_sum(table.d);
  if (table.kind == ModelKind::poisson) {
    const double sum_y = exact_sum(table.y);
    state.beta = (sum_y > 0.0 && sum_d > 0.0) ? sum_y / sum_d : 1.0;
  } else {
    std::vector<double> weighted(table.rows());
    for (std::size_t j = 0; j < table.rows(); ++j) weighted[j] = table.y[j] * table.d[j];
    state.beta = sum_d > 0.0 ? exact_sum(weighted) / sum_d : 0.0;
  }
  refresh_prediction(state, table);
  return state;
}

}  // namespace blockgibbs
