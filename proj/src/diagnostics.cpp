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

#include "blockgibbs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "blockgibbs/gaussian_sampler.hpp"
#include "blockgibbs/kernels.hpp"
#include "blockgibbs/poisson_sampler.hpp"
#include "blockgibbs/rng.hpp"

namespace blockgibbs {

Trace::Trace(std::vector<std::string> parameter_names)
    : names(std::move(parameter_names)), columns(names.size()) {}

void Trace::append(std::size_t iteration, std::span<const double> values) {
  if (values.size() != columns.size()) throw std::invalid_argument("trace row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) columns[i].push_back(values[i]);
  iterations.push_back(iteration);
}

double ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("ess needs at least 10 draws");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mean;
  const auto autocovariance = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += centered[i] * centered[i + lag];
    return acc / static_cast<double>(n);
  };
  const double variance = autocovariance(0);
  if (!(variance > 0.0)) return static_cast<double>(n);

  // τ = -1 + 2 Σ_m Γ_m with Γ_m = ρ_2m + ρ_2m+1, summed while Γ_m > 0.
  double tau = -1.0;
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair = (autocovariance(2 * m) + autocovariance(2 * m + 1)) / variance;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / tau;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<ParameterSummary> summarize(const Trace& trace) {
  if (trace.burn_in >= trace.length()) {
    throw std::invalid_argument("no draws left after burn-in");
  }
  std::vector<ParameterSummary> out;
  out.reserve(trace.names.size());
  for (std::size_t p = 0; p < trace.names.size(); ++p) {
    std::vector<double> kept(trace.columns[p].begin() + static_cast<std::ptrdiff_t>(trace.burn_in),
                             trace.columns[p].end());
    const auto n = static_cast<double>(kept.size());
    const double mean = std::accumulate(kept.begin(), kept.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : kept) ss += (x - mean) * (x - mean);
    const double sd = kept.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    const double effective =
        kept.size() >= 10 ? ess(kept) : std::numeric_limits<double>::quiet_NaN();
    std::sort(kept.begin(), kept.end());
    out.push_back({trace.names[p], mean, sd, quantile_sorted(kept, 0.025),
                   quantile_sorted(kept, 0.5), quantile_sorted(kept, 0.975), effective});
  }
  return out;
}

namespace {

struct ToyModel {
  ObservationTable table;
  FamilyLayout layout;
};

ToyModel make_toy(const GewekeConfig& config, RngStream& rng) {
  ToyModel toy;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < config.levels.size(); ++k) names.push_back(fmt::format("f{}", k + 1));
  toy.layout = FamilyLayout::with_level_counts(names, config.levels);
  auto& table = toy.table;
  table.kind = config.model;
  table.y.assign(config.rows, 0.0);
  table.d.resize(config.rows);
  table.index.assign(config.levels.size(), std::vector<LevelIndex>(config.rows));
  for (std::size_t j = 0; j < config.rows; ++j) {
    table.d[j] = 0.5 + 1.5 * rng.uniform();
    for (std::size_t k = 0; k < config.levels.size(); ++k) {
      table.index[k][j] =
          static_cast<LevelIndex>(rng.uniform() * static_cast<double>(config.levels[k]));
    }
  }
  if (config.model == ModelKind::gaussian) {
    table.scale.emplace(config.levels.size(), std::vector<double>(config.rows));
    for (auto& column : *table.scale) {
      for (double& s : column) {
        const double magnitude = 0.5 + rng.uniform();
        s = rng.uniform() < 0.5 ? -magnitude : magnitude;
      }
    }
  }
  return toy;
}

void draw_from_prior(const GewekeConfig& config, const ToyModel& toy, ModelState& state,
                     RngStream& rng) {
  const auto points = config.grid.points();
  const std::vector<double> flat(points.size(), 1.0);
  for (std::size_t k = 0; k < state.b.size(); ++k) {
    const double sigma = points[rng.categorical(flat)];
    const double a = 1.0 / (sigma * sigma);
    state.sigma[k] = sigma;
    for (double& b : state.b[k]) {
      b = config.model == ModelKind::poisson ? rng.gamma(a, a) : rng.normal(0.0, sigma);
    }
  }
  state.beta = config.model == ModelKind::poisson
                   ? rng.gamma(1.0, 1.0)
                   : rng.normal(0.0, 1.0 / std::sqrt(config.beta_prior_precision));
  refresh_prediction(state, toy.table);
}

void draw_data(ToyModel& toy, const ModelState& state, RngStream& rng) {
  auto& table = toy.table;
  const auto mean = predict(state, table);
  for (std::size_t j = 0; j < table.rows(); ++j) {
    table.y[j] = table.kind == ModelKind::poisson
                     ? static_cast<double>(rng.poisson(mean[j]))
                     : rng.normal(mean[j], 1.0 / std::sqrt(table.d[j]));
  }
}

std::vector<std::string> battery_names(std::size_t families) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < families; ++k) {
    names.push_back(fmt::format("log_sigma_{}", k + 1));
    names.push_back(fmt::format("log_sigma_{}_sq", k + 1));
  }
  names.emplace_back("beta");
  names.emplace_back("beta_sq");
  for (std::size_t k = 0; k < families; ++k) names.push_back(fmt::format("mean_b_{}", k + 1));
  return names;
}

std::vector<double> battery(const ModelState& state) {
  std::vector<double> out;
  for (double sigma : state.sigma) {
    const double ls = std::log(sigma);
    out.push_back(ls);
    out.push_back(ls * ls);
  }
  out.push_back(state.beta);
  out.push_back(state.beta * state.beta);
  for (const auto& b : state.b) {
    out.push_back(b.empty() ? 0.0 : std::accumulate(b.begin(), b.end(), 0.0) /
                                         static_cast<double>(b.size()));
  }
  return out;
}

ScanRecord scan_once(const ToyModel& toy, const ScanConfig& scan_config, ModelState& state,
                     RandomSource& source) {
  if (toy.table.kind == ModelKind::poisson) {
    return PoissonSampler(toy.table, toy.layout, {}, scan_config).scan(state, source);
  }
  return GaussianSampler(toy.table, toy.layout, scan_config).scan(state, source);
}

}  // namespace

std::vector<GewekeStatistic> geweke_check(const GewekeConfig& config) {
  if (config.draws < 10) throw std::invalid_argument("Geweke check needs at least 10 draws");
  RngStream design_rng(config.seed, 0, 0, static_cast<std::uint32_t>(StreamPhase::test) << 24);
  ToyModel toy = make_toy(config, design_rng);
  const auto names = battery_names(config.levels.size());

  ScanConfig scan_config;
  scan_config.sigma.grid = config.grid;
  scan_config.beta_prior_precision = config.beta_prior_precision;
  scan_config.stats_fault = config.stats_fault;

  // Marginal-conditional arm: independent draws from the prior.
  RngStream prior_rng(config.seed, 1, 0, static_cast<std::uint32_t>(StreamPhase::test) << 24);
  ModelState state = initial_state(toy.table, toy.layout);
  Trace marginal(names);
  for (std::size_t i = 0; i < config.draws; ++i) {
    draw_from_prior(config, toy, state, prior_rng);
    marginal.append(i, battery(state));
  }

  // Successive-conditional arm: scan given data, then regenerate data.
  RngStream chain_rng(config.seed, 2, 0, static_cast<std::uint32_t>(StreamPhase::test) << 24);
  RandomSource source(config.seed ^ 0x5bd1e995u);
  draw_from_prior(config, toy, state, chain_rng);
  draw_data(toy, state, chain_rng);
  Trace successive(names);
  for (std::size_t i = 0; i < config.draws; ++i) {
    scan_once(toy, scan_config, state, source);
    draw_data(toy, state, chain_rng);
    successive.append(i, battery(state));
  }

  std::vector<GewekeStatistic> out;
  for (std::size_t p = 0; p < names.size(); ++p) {
    const auto& mc = marginal.columns[p];
    const auto& sc = successive.columns[p];
    const auto moments = [](const std::vector<double>& xs) {
      const auto n = static_cast<double>(xs.size());
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      return std::pair{mean, ss / (n - 1.0)};
    };
    const auto [mc_mean, mc_var] = moments(mc);
    const auto [sc_mean, sc_var] = moments(sc);
    const double se2 = mc_var / static_cast<double>(mc.size()) + sc_var / ess(sc);
    double z = (mc_mean - sc_mean) / std::sqrt(se2);
    if (se2 == 0.0) z = mc_mean == sc_mean ? 0.0 : std::numeric_limits<double>::infinity();
    if (!std::isfinite(mc_mean) || !std::isfinite(sc_mean)) {
      z = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back({names[p], mc_mean, sc_mean, z});
  }
  return out;
}

}  // namespace blockgibbs
