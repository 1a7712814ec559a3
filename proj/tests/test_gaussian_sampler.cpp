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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "blockgibbs/gaussian_sampler.hpp"
#include "blockgibbs/kernels.hpp"
#include "oracles.hpp"

using namespace blockgibbs;

namespace {

FamilySuffStats stats_of(std::vector<double> error, std::vector<double> invvar) {
  FamilySuffStats s;
  s.kind = StatsKind::gaussian;
  s.a = std::move(error);
  s.b = std::move(invvar);
  return s;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

std::vector<double> level_draws(std::size_t n, double sigma, double error, double invvar,
                                std::uint64_t seed = 1) {
  RandomSource source(seed);
  return sample_b_family_gauss(
      sigma, stats_of(std::vector<double>(n, error), std::vector<double>(n, invvar)),
      LevelStreams(source, 0));
}

}  // namespace

TEST_CASE("gaussian sufficient statistics") {
  ObservationTable table;
  table.kind = ModelKind::gaussian;
  table.y = {1, 2, 3, 4};
  table.d = {1, 1, 1, 1};
  table.index = {{0, 1, 1, 0}};
  const std::vector<std::size_t> levels{3};
  const auto layout = FamilyLayout::with_level_counts({"f"}, levels);
  auto state = initial_state(table, layout);
  const auto s = gaussian_suff_stats(0, table, state);
  CHECK(std::vector<double>(s.b) == std::vector<double>{2, 2, 0});
  CHECK(s.a[2] == 0.0);

  // One row: Y = 3, Π = 1 with own-effect contribution 0.5 * 2.
  ObservationTable one;
  one.kind = ModelKind::gaussian;
  one.y = {3};
  one.d = {1};
  one.index = {{0}};
  one.scale.emplace(1, std::vector<double>{2.0});
  const std::vector<std::size_t> one_level{1};
  const auto one_layout = FamilyLayout::with_level_counts({"f"}, one_level);
  ModelState st = initial_state(one, one_layout);
  st.b[0] = {0.5};
  st.beta = 0.0;
  refresh_prediction(st, one);
  CHECK(st.pi[0] == 1.0);
  const auto s1 = gaussian_suff_stats(0, one, st);
  CHECK(s1.a[0] == 6.0);
  CHECK(s1.b[0] == 4.0);
}

TEST_CASE("error statistic equals the excluded-prediction form") {
  RngStream rng(61);
  const std::size_t n = 500;
  ObservationTable table;
  table.kind = ModelKind::gaussian;
  table.index.assign(2, std::vector<LevelIndex>(n));
  table.scale.emplace(2, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    table.y.push_back(rng.normal(0.0, 3.0));
    table.d.push_back(0.5 + rng.uniform());
    for (std::size_t k = 0; k < 2; ++k) {
      table.index[k][j] = rng.next_u32() % 7;
      (*table.scale)[k][j] = rng.normal();
    }
  }
  const std::vector<std::size_t> levels{7, 7};
  const auto layout = FamilyLayout::with_level_counts({"a", "b"}, levels);
  auto state = initial_state(table, layout);
  for (auto& b : state.b) for (double& x : b) x = rng.normal();
  refresh_prediction(state, table);
  const auto s = gaussian_suff_stats(0, table, state);
  // Prediction with family 0 removed.
  ModelState without = state;
  without.b[0].assign(7, 0.0);
  const auto partial = gauss_predict(without, table);
  std::vector<double> expect(7, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double sc = (*table.scale)[0][j];
    expect[table.index[0][j]] += (table.y[j] - partial[j]) * sc * table.d[j];
  }
  for (std::size_t t = 0; t < 7; ++t) CHECK(s.a[t] == doctest::Approx(expect[t]).epsilon(1e-12));
}

TEST_CASE("closed-form gaussian marginals") {
  CHECK(log_gauss_marginal(0.4, stats_of({0, 0}, {0, 0})) == 0.0);
  CHECK(log_gauss_marginal(1.0, stats_of({1}, {1})) ==
        doctest::Approx(0.5 * std::log(0.5) + 0.25).epsilon(1e-14));
  CHECK(0.5 * std::log(0.5) + 0.25 == doctest::Approx(-0.0965736).epsilon(1e-6));
}

TEST_CASE("gaussian marginal matches quadrature over random triples") {
  RngStream rng(62);
  for (int i = 0; i < 200; ++i) {
    const double sigma = 0.05 + 4.95 * rng.uniform();
    const double invvar = 100.0 * rng.uniform();
    const double error = rng.normal(0.0, 10.0);
    const double ours = log_gauss_marginal(sigma, stats_of({error}, {invvar}));
    const double ref = oracle::gaussian_level(sigma, error, invvar);
    INFO("sigma " << sigma << " error " << error << " invvar " << invvar);
    CHECK(std::fabs(ours - ref) <= 1e-8 * std::max(std::fabs(ref), 1e-300));
  }
}

TEST_CASE("conditional effect draws") {
  const auto centred = level_draws(100000, 1.0, 0.0, 3.0);
  CHECK(std::fabs(mean_of(centred)) < 4.0 * 0.5 / std::sqrt(100000.0));
  CHECK(var_of(centred) == doctest::Approx(0.25).epsilon(0.02));

  const auto d = level_draws(100000, 1.0, 2.0, 4.0);
  CHECK(mean_of(d) == doctest::Approx(0.4).epsilon(0.01));
  CHECK(std::sqrt(var_of(d)) == doctest::Approx(std::sqrt(0.2)).epsilon(0.01));

  const auto tight = level_draws(1000, 1e-6, 5.0, 1.0);
  for (double x : tight) REQUIRE(std::fabs(x) < 1e-4);
}

TEST_CASE("one-family posterior matches the closed form at fixed sigma") {
  RngStream rng(63);
  const std::size_t n = 300;
  ObservationTable table;
  table.kind = ModelKind::gaussian;
  table.index = {std::vector<LevelIndex>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    table.index[0][j] = rng.next_u32() % 5;
    table.y.push_back(rng.normal(table.index[0][j] * 0.3, 1.0));
    table.d.push_back(0.2 + rng.uniform());
  }
  const std::vector<std::size_t> levels{5};
  const auto layout = FamilyLayout::with_level_counts({"f"}, levels);
  auto state = initial_state(table, layout);
  const double sigma = 0.8;
  const auto stats = gaussian_suff_stats(0, table, state);
  const std::size_t draws = 40000;
  std::vector<std::vector<double>> samples(5);
  for (std::uint64_t i = 0; i < draws; ++i) {
    RandomSource source(1000 + i);
    const auto b = sample_b_family_gauss(sigma, stats, LevelStreams(source, 0));
    for (std::size_t t = 0; t < 5; ++t) samples[t].push_back(b[t]);
  }
  for (std::size_t t = 0; t < 5; ++t) {
    const double precision = stats.b[t] + 1.0 / (sigma * sigma);
    const double m = stats.a[t] / precision;
    const double se = std::sqrt(1.0 / precision / draws);
    CHECK(std::fabs(mean_of(samples[t]) - m) < 3.0 * se);
    CHECK(var_of(samples[t]) == doctest::Approx(1.0 / precision).epsilon(3.0 * std::sqrt(2.0 / draws)));
  }
}

TEST_CASE("intercept draws") {
  ObservationTable table;
  table.kind = ModelKind::gaussian;
  table.y = {2.0, 4.0};
  table.d = {1.0, 1.0};
  table.index = {};
  FamilyLayout none;
  auto state = initial_state(table, none);
  std::vector<double> draws;
  for (std::uint32_t i = 0; i < 100000; ++i) {
    state.beta = 0.0;
    refresh_prediction(state, table);
    RngStream rng(64, i, 0, 0);
    sample_beta_gauss(table, state, rng);
    draws.push_back(state.beta);
  }
  CHECK(mean_of(draws) == doctest::Approx(3.0).epsilon(0.002));
  CHECK(var_of(draws) == doctest::Approx(0.5).epsilon(0.02));
  const auto fresh = gauss_predict(state, table);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::fabs(state.pi[j] - fresh[j]) <= 1e-12);

  // Zero residuals leave the mean at β.
  draws.clear();
  table.y = {0.0, 0.0};
  for (std::uint32_t i = 0; i < 50000; ++i) {
    state.beta = 0.0;
    refresh_prediction(state, table);
    RngStream rng(65, i, 0, 0);
    sample_beta_gauss(table, state, rng);
    draws.push_back(state.beta);
  }
  CHECK(std::fabs(mean_of(draws)) < 4.0 * std::sqrt(0.5 / 50000));

  ObservationTable empty;
  empty.kind = ModelKind::gaussian;
  auto es = initial_state(empty, none);
  RngStream rng(66);
  CHECK_THROWS(sample_beta_gauss(empty, es, rng));
  sample_beta_gauss(empty, es, rng, 1.0);
  CHECK(std::isfinite(es.beta));
}

TEST_CASE("gaussian scans are deterministic and sample sigma from its prior without data") {
  ObservationTable table;
  table.kind = ModelKind::gaussian;
  table.y = {0.3};
  table.d = {1e-14};
  table.index = {{0}};
  const std::vector<std::size_t> levels{2};
  const auto layout = FamilyLayout::with_level_counts({"f"}, levels);
  ScanConfig config;
  config.sigma.grid = SigmaGrid::geometric(0.2, 2.0, 5);
  const GaussianSampler sampler(table, layout, config);
  const auto run = [&](std::vector<double>& counts) {
    ModelState state = initial_state(table, layout);
    RandomSource rng(67);
    std::vector<double> trace;
    for (int i = 0; i < 25000; ++i) {
      const auto r = sampler.scan(state, rng);
      trace.push_back(r.sigma[0]);
      for (std::size_t g = 0; g < 5; ++g) counts[g] += r.sigma[0] == config.sigma.grid.points()[g];
    }
    return trace;
  };
  std::vector<double> c1(5, 0.0), c2(5, 0.0);
  CHECK(run(c1) == run(c2));
  CHECK(oracle::chi_squared_passes(c1, std::vector<double>(5, 5000.0), 0.001));
}
