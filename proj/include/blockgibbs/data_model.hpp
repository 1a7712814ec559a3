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

#ifndef BLOCKGIBBS_DATA_MODEL_HPP
#define BLOCKGIBBS_DATA_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace blockgibbs {

enum class ModelKind { poisson, gaussian };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

using LevelIndex = std::uint32_t;

// Families of categorical levels. Level indices are dense and assigned in
// the order levels are first registered. Internally indices are 0-based;
// external formats (CSV, reports) present them 1-based.
class FamilyLayout {
 public:
  FamilyLayout() = default;

  // Layout with `levels[k]` anonymous levels per family, labelled "1".."L_k".
  static FamilyLayout with_level_counts(std::vector<std::string> names,
                                        std::span<const std::size_t> levels);

  std::size_t add_family(std::string name);
  // Returns the index of `label` in family k, registering it if new.
  LevelIndex encode(std::size_t k, std::string_view label);
  std::optional<LevelIndex> find(std::size_t k, std::string_view label) const;
  const std::string& decode(std::size_t k, LevelIndex t) const;

  std::size_t num_families() const { return names_.size(); }
  std::size_t num_levels(std::size_t k) const { return labels_[k].size(); }
  // T_k: number of effects in families 0..k-1. offset(F) is the total r.
  std::size_t offset(std::size_t k) const;
  std::size_t total_effects() const { return offset(num_families()); }
  const std::string& name(std::size_t k) const { return names_[k]; }
  const std::vector<std::string>& labels(std::size_t k) const { return labels_[k]; }

  // Per-level keys that identify a level independently of its index: the
  // rank of the label in lexicographic order. Random streams are keyed on
  // these so relabelling levels does not change which draws they receive.
  std::vector<std::uint32_t> stream_keys(std::size_t k) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<std::unordered_map<std::string, LevelIndex>> lookup_;
};

// Columnar observation store. The index and scale matrices are stored one
// column per family so that per-family scans are contiguous.
struct ObservationTable {
  ModelKind kind = ModelKind::poisson;
  std::vector<double> y;
  std::vector<double> d;
  std::vector<std::vector<LevelIndex>> index;
  // Present only for Gaussian models; absent means every scale is 1.
  std::optional<std::vector<std::vector<double>>> scale;

  std::size_t rows() const { return y.size(); }
  std::size_t families() const { return index.size(); }
  bool has_scale() const { return scale.has_value(); }
  double scale_at(std::size_t j, std::size_t k) const {
    return scale ? (*scale)[k][j] : 1.0;
  }
};

struct ModelState {
  // b[k][t]: exp-scale effect for Poisson, linear effect for Gaussian.
  std::vector<std::vector<double>> b;
  double beta = 1.0;
  std::vector<double> sigma;
  // Spike weight per family; stays 0 for conjugate priors.
  std::vector<double> spike_weight;
  std::vector<double> pi;
  std::size_t refresh_counter = 0;

  std::size_t families() const { return b.size(); }
};

// Neutral starting point: B = 1 (Poisson) or 0 (Gaussian), β at its
// no-effects estimate, σ = `initial_sigma`, and Π refreshed.
ModelState initial_state(const ObservationTable& table, const FamilyLayout& layout,
                         double initial_sigma = 1.0);

enum class StatsKind { poisson, gaussian };

// Per-level aggregates. Poisson: a = events, b = pevents.
// Gaussian: a = error, b = invvar.
struct FamilySuffStats {
  StatsKind kind = StatsKind::poisson;
  std::vector<double> a;
  std::vector<double> b;

  std::size_t levels() const { return a.size(); }
  std::span<const double> events() const { return a; }
  std::span<const double> pevents() const { return b; }
  std::span<const double> error() const { return a; }
  std::span<const double> invvar() const { return b; }
};

enum class PriorKind { conjugate, spike_slab };

// Effect prior for one family. The spike-and-slab form puts mass w on an
// effect of exactly `spike_location` and 1 - w on the conjugate Gamma slab;
// (w, σ) are drawn jointly over `weight_grid` × the σ grid.
struct PriorSpec {
  PriorKind kind = PriorKind::conjugate;
  double spike_location = 1.0;
  std::vector<double> weight_grid;

  static PriorSpec conjugate() { return {}; }
  static PriorSpec spike_slab(std::size_t grid_points = 21);
};

struct Violation {
  std::size_t row;  // 0-based; npos for table-level problems
  std::string what;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

std::vector<Violation> validate(const ObservationTable& table, const FamilyLayout& layout);
std::vector<Violation> validate(const PriorSpec& prior);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_DATA_MODEL_HPP
