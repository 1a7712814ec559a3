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

#include "blockgibbs/poisson_sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace blockgibbs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double x, double y) {
  if (x == kNegInf) return y;
  if (y == kNegInf) return x;
  return x > y ? x + std::log1p(std::exp(y - x)) : y + std::log1p(std::exp(x - y));
}

double check_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::logic_error(fmt::format("{} evaluated to a non-finite value", what));
  }
  return value;
}

// Log-weights of the spike and the slab for one level.
std::pair<double, double> spike_slab_terms(double w, double sigma, double events,
                                           double pevents) {
  const double spike = w > 0.0 ? std::log(w) - pevents : kNegInf;
  const double slab =
      w < 1.0 ? std::log1p(-w) + log_conjugate_level(sigma, events, pevents) : kNegInf;
  return {spike, slab};
}

void beta_step(double sum_y, ModelState& state, RngStream& rng) {
  const double beta_new = rng.gamma(1.0 + sum_y, 1.0 + exact_sum(state.pi) / state.beta);
  const double ratio = beta_new / state.beta;
  for (double& p : state.pi) p *= ratio;
  state.beta = beta_new;
}

}  // namespace

ScanRecord record_of(const ModelState& state) {
  return {state.beta, state.sigma, state.spike_weight};
}

FamilySuffStats poisson_suff_stats(std::size_t k, const ObservationTable& table,
                                   const ModelState& state, Summation mode) {
  const auto& index = table.index.at(k);
  const std::size_t levels = state.b[k].size();
  FamilySuffStats stats;
  stats.kind = StatsKind::poisson;
  stats.a = sum_by(index, table.y, levels, mode);
  const auto& effects = state.b[k];
  const auto& pi = state.pi;
  stats.b = grouped_sum(index, levels, mode,
                        [&](std::size_t j) { return pi[j] / effects[index[j]]; });
  return stats;
}

double log_conjugate_level(double sigma, double events, double pevents) {
  const double a = 1.0 / (sigma * sigma);
  // a log a - lgamma(a) - (a + e) log(a + p) + lgamma(a + e), rearranged to
  // avoid cancelling two large a log a terms.
  double value = -a * std::log1p(pevents / a);
  if (events > 0.0) {
    value += std::lgamma(a + events) - std::lgamma(a) - events * std::log(a + pevents);
  }
  return value;
}

double log_conjugate_marginal(double sigma, const FamilySuffStats& stats) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  ExactAccumulator acc;
  for (std::size_t t = 0; t < stats.levels(); ++t) {
    acc.add(log_conjugate_level(sigma, stats.a[t], stats.b[t]));
  }
  return check_finite(acc.result(), "conjugate log marginal");
}

std::vector<double> sample_b_family(double sigma, const FamilySuffStats& stats,
                                    const LevelStreams& streams) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double a = 1.0 / (sigma * sigma);
  std::vector<double> out(stats.levels());
  for (std::size_t t = 0; t < out.size(); ++t) {
    RngStream rng = streams(t);
    out[t] = rng.gamma(stats.a[t] + a, stats.b[t] + a);
  }
  return out;
}

double spike_slab_log_marginal(double w, double sigma, const FamilySuffStats& stats) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("spike weight outside [0, 1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  ExactAccumulator acc;
  for (std::size_t t = 0; t < stats.levels(); ++t) {
    const auto [spike, slab] = spike_slab_terms(w, sigma, stats.a[t], stats.b[t]);
    acc.add(log_add(spike, slab));
  }
  return check_finite(acc.result(), "spike-and-slab log marginal");
}

std::vector<double> spike_slab_sample_b(double w, double sigma, const FamilySuffStats& stats,
                                        const LevelStreams& streams) {
  if (w == 0.0) return sample_b_family(sigma, stats, streams);
  const double a = 1.0 / (sigma * sigma);
  std::vector<double> out(stats.levels());
  for (std::size_t t = 0; t < out.size(); ++t) {
    RngStream rng = streams(t);
    const auto [spike, slab] = spike_slab_terms(w, sigma, stats.a[t], stats.b[t]);
    const double spike_probability = std::exp(spike - log_add(spike, slab));
    if (rng.uniform() < spike_probability) {
      out[t] = 1.0;
    } else {
      out[t] = rng.gamma(stats.a[t] + a, stats.b[t] + a);
    }
  }
  return out;
}

std::pair<double, double> draw_spike_slab_hyper(const FamilySuffStats& stats,
                                                std::span<const double> weight_grid,
                                                const SigmaGrid& sigma_grid, RngStream& rng) {
  const auto sigmas = sigma_grid.points();
  const std::size_t levels = stats.levels();
  std::vector<double> slab(sigmas.size() * levels);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    for (std::size_t t = 0; t < levels; ++t) {
      slab[i * levels + t] = log_conjugate_level(sigmas[i], stats.a[t], stats.b[t]);
    }
  }
  std::vector<double> log_density(weight_grid.size() * sigmas.size());
  for (std::size_t wi = 0; wi < weight_grid.size(); ++wi) {
    const double w = weight_grid[wi];
    const double log_w = w > 0.0 ? std::log(w) : kNegInf;
    const double log_1mw = w < 1.0 ? std::log1p(-w) : kNegInf;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      ExactAccumulator acc;
      for (std::size_t t = 0; t < levels; ++t) {
        const double spike = log_w == kNegInf ? kNegInf : log_w - stats.b[t];
        const double slab_term = log_1mw == kNegInf ? kNegInf : log_1mw + slab[i * levels + t];
        acc.add(log_add(spike, slab_term));
      }
      log_density[wi * sigmas.size() + i] = acc.result();
    }
  }
  const std::size_t pick = griddy_draw_index(log_density, rng);
  return {weight_grid[pick / sigmas.size()], sigmas[pick % sigmas.size()]};
}

void sample_beta(const ObservationTable& table, ModelState& state, RngStream& rng) {
  beta_step(exact_sum(table.y), state, rng);
}

PoissonSampler::PoissonSampler(const ObservationTable& table, const FamilyLayout& layout,
                               std::vector<PriorSpec> priors, ScanConfig config)
    : table_(table), layout_(layout), priors_(std::move(priors)), config_(std::move(config)) {
  if (table.kind != ModelKind::poisson) {
    throw std::invalid_argument("PoissonSampler needs a Poisson table");
  }
  if (auto problems = validate(table, layout); !problems.empty()) {
    throw std::invalid_argument(fmt::format("invalid table: {}", problems.front().what));
  }
  const std::size_t families = layout.num_families();
  if (priors_.empty()) priors_.assign(families, PriorSpec::conjugate());
  if (priors_.size() != families) throw std::invalid_argument("one prior per family required");
  for (const auto& prior : priors_) {
    if (auto problems = validate(prior); !problems.empty()) {
      throw std::invalid_argument(problems.front().what);
    }
  }
  keys_.reserve(families);
  events_.reserve(families);
  for (std::size_t k = 0; k < families; ++k) {
    keys_.push_back(layout.stream_keys(k));
    events_.push_back(sum_by(table.index[k], table.y, layout.num_levels(k), config_.summation));
  }
  total_events_ = exact_sum(table.y);
}

FamilySuffStats PoissonSampler::stats(std::size_t k, const ModelState& state) const {
  const auto& index = table_.index[k];
  const auto& effects = state.b[k];
  const auto& pi = state.pi;
  FamilySuffStats stats;
  stats.kind = StatsKind::poisson;
  stats.a = events_[k];
  stats.b = grouped_sum(index, effects.size(), config_.summation,
                        [&](std::size_t j) { return pi[j] / effects[index[j]]; });
  if (config_.stats_fault != 1.0) {
    for (double& p : stats.b) p *= config_.stats_fault;
  }
  return stats;
}

void PoissonSampler::update_effects(std::size_t k, ModelState& state,
                                    const FamilySuffStats& stats,
                                    const RandomSource& rng) const {
  const LevelStreams streams(rng, static_cast<std::uint32_t>(k), keys_[k]);
  auto b_new = priors_[k].kind == PriorKind::spike_slab
                   ? spike_slab_sample_b(state.spike_weight[k], state.sigma[k], stats, streams)
                   : sample_b_family(state.sigma[k], stats, streams);
  apply_family_update(state, k, std::move(b_new), table_, config_.refresh_cadence);
}

ScanRecord PoissonSampler::scan(ModelState& state, RandomSource& rng) const {
  refresh_prediction(state, table_);
  RngStream beta_rng = rng.stream(StreamPhase::beta);
  beta_step(total_events_, state, beta_rng);
  for (std::size_t k = 0; k < layout_.num_families(); ++k) {
    const FamilySuffStats family_stats = stats(k, state);
    RngStream sigma_rng = rng.stream(StreamPhase::sigma, static_cast<std::uint32_t>(k));
    if (priors_[k].kind == PriorKind::spike_slab) {
      const auto [w, sigma] = draw_spike_slab_hyper(family_stats, priors_[k].weight_grid,
                                                    config_.sigma.grid, sigma_rng);
      state.spike_weight[k] = w;
      state.sigma[k] = sigma;
    } else {
      state.sigma[k] = draw_sigma(
          state.sigma[k],
          [&family_stats](double s) { return log_conjugate_marginal(s, family_stats); },
          config_.sigma, sigma_rng);
    }
    update_effects(k, state, family_stats, rng);
  }
  rng.next_epoch();
  return record_of(state);
}

ScanRecord poisson_scan(ModelState& state, const ObservationTable& table,
                        const FamilyLayout& layout, const std::vector<PriorSpec>& priors,
                        const ScanConfig& config, RandomSource& rng) {
  return PoissonSampler(table, layout, priors, config).scan(state, rng);
}

}  // namespace blockgibbs
