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

#include "blockgibbs/gaussian_sampler.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace blockgibbs {

namespace {

std::vector<double> invvar_of(std::size_t k, const ObservationTable& table, std::size_t levels,
                              Summation mode) {
  const auto& index = table.index[k];
  return grouped_sum(index, levels, mode, [&](std::size_t j) {
    const double s = table.scale_at(j, k);
    return s * s * table.d[j];
  });
}

std::vector<double> error_of(std::size_t k, const ObservationTable& table,
                             const ModelState& state, Summation mode) {
  const auto& index = table.index[k];
  const auto& effects = state.b[k];
  const auto& pi = state.pi;
  return grouped_sum(index, effects.size(), mode, [&](std::size_t j) {
    const double s = table.scale_at(j, k);
    return (table.y[j] - pi[j] + effects[index[j]] * s) * s * table.d[j];
  });
}

void beta_step(const ObservationTable& table, double sum_d, double prior_precision,
               ModelState& state, RngStream& rng) {
  // Posterior for β given everything else: precision ΣD + τ, mean
  // ΣD (Y - Π + β) / (ΣD + τ). Written as a shift of β for accuracy.
  std::vector<double> weighted(table.rows());
  for (std::size_t j = 0; j < table.rows(); ++j) {
    weighted[j] = table.d[j] * (table.y[j] - state.pi[j]);
  }
  const double precision = sum_d + prior_precision;
  if (!(precision > 0.0)) {
    throw std::invalid_argument("intercept posterior is improper: no rows and a flat prior");
  }
  const double mean =
      state.beta + (exact_sum(weighted) - prior_precision * state.beta) / precision;
  const double beta_new = rng.normal(mean, 1.0 / std::sqrt(precision));
  const double shift = beta_new - state.beta;
  for (double& p : state.pi) p += shift;
  state.beta = beta_new;
}

}  // namespace

FamilySuffStats gaussian_suff_stats(std::size_t k, const ObservationTable& table,
                                    const ModelState& state, Summation mode) {
  FamilySuffStats stats;
  stats.kind = StatsKind::gaussian;
  stats.a = error_of(k, table, state, mode);
  stats.b = invvar_of(k, table, state.b[k].size(), mode);
  return stats;
}

double log_gauss_marginal(double sigma, const FamilySuffStats& stats) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double a = 1.0 / (sigma * sigma);
  ExactAccumulator acc;
  for (std::size_t t = 0; t < stats.levels(); ++t) {
    const double error = stats.a[t];
    const double invvar = stats.b[t];
    const double precision = invvar + a;
    acc.add(-0.5 * std::log1p(invvar / a) + 0.5 * error * error / precision);
  }
  const double value = acc.result();
  if (!std::isfinite(value)) throw std::logic_error("Gaussian log marginal is not finite");
  return value;
}

std::vector<double> sample_b_family_gauss(double sigma, const FamilySuffStats& stats,
                                          const LevelStreams& streams) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double a = 1.0 / (sigma * sigma);
  std::vector<double> out(stats.levels());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double precision = stats.b[t] + a;
    RngStream rng = streams(t);
    out[t] = rng.normal(stats.a[t] / precision, 1.0 / std::sqrt(precision));
  }
  return out;
}

void sample_beta_gauss(const ObservationTable& table, ModelState& state, RngStream& rng,
                       double prior_precision) {
  beta_step(table, exact_sum(table.d), prior_precision, state, rng);
}

GaussianSampler::GaussianSampler(const ObservationTable& table, const FamilyLayout& layout,
                                 ScanConfig config)
    : table_(table), layout_(layout), config_(std::move(config)) {
  if (table.kind != ModelKind::gaussian) {
    throw std::invalid_argument("GaussianSampler needs a Gaussian table");
  }
  if (auto problems = validate(table, layout); !problems.empty()) {
    throw std::invalid_argument(fmt::format("invalid table: {}", problems.front().what));
  }
  for (std::size_t k = 0; k < layout.num_families(); ++k) {
    keys_.push_back(layout.stream_keys(k));
    invvar_.push_back(invvar_of(k, table, layout.num_levels(k), config_.summation));
  }
  sum_d_ = exact_sum(table.d);
}

FamilySuffStats GaussianSampler::stats(std::size_t k, const ModelState& state) const {
  FamilySuffStats stats;
  stats.kind = StatsKind::gaussian;
  stats.a = error_of(k, table_, state, config_.summation);
  stats.b = invvar_[k];
  if (config_.stats_fault != 1.0) {
    for (double& v : stats.b) v *= config_.stats_fault;
  }
  return stats;
}

ScanRecord GaussianSampler::scan(ModelState& state, RandomSource& rng) const {
  refresh_prediction(state, table_);
  RngStream beta_rng = rng.stream(StreamPhase::beta);
  beta_step(table_, sum_d_, config_.beta_prior_precision, state, beta_rng);
  for (std::size_t k = 0; k < layout_.num_families(); ++k) {
    const FamilySuffStats family_stats = stats(k, state);
    RngStream sigma_rng = rng.stream(StreamPhase::sigma, static_cast<std::uint32_t>(k));
    state.sigma[k] = draw_sigma(
        state.sigma[k], [&family_stats](double s) { return log_gauss_marginal(s, family_stats); },
        config_.sigma, sigma_rng);
    const LevelStreams streams(rng, static_cast<std::uint32_t>(k), keys_[k]);
    auto b_new = sample_b_family_gauss(state.sigma[k], family_stats, streams);
    apply_family_update(state, k, std::move(b_new), table_, config_.refresh_cadence);
  }
  rng.next_epoch();
  return record_of(state);
}

ScanRecord gaussian_scan(ModelState& state, const ObservationTable& table,
                         const FamilyLayout& layout, const ScanConfig& config,
                         RandomSource& rng) {
  return GaussianSampler(table, layout, config).scan(state, rng);
}

}  // namespace blockgibbs
