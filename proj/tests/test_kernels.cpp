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
#include <limits>
#include <vector>

#include "blockgibbs/kernels.hpp"
#include "blockgibbs/rng.hpp"

using namespace blockgibbs;

namespace {

ObservationTable table_of(ModelKind kind, std::vector<double> d,
                          std::vector<std::vector<LevelIndex>> index) {
  ObservationTable t;
  t.kind = kind;
  t.y.assign(d.size(), 0.0);
  t.d = std::move(d);
  t.index = std::move(index);
  return t;
}

ModelState state_of(std::vector<std::vector<double>> b, double beta) {
  ModelState s;
  s.b = std::move(b);
  s.beta = beta;
  s.sigma.assign(s.b.size(), 1.0);
  s.spike_weight.assign(s.b.size(), 0.0);
  return s;
}

}  // namespace

TEST_CASE("poisson prediction") {
  const auto t1 = table_of(ModelKind::poisson, {3, 4}, {{0, 1}});
  CHECK(predict_poisson(state_of({{1, 1}}, 1.0), t1) == std::vector<double>{3, 4});
  CHECK(predict_poisson(state_of({{1, 1}}, 2.0), t1) == std::vector<double>{6, 8});
  const auto t2 = table_of(ModelKind::poisson, {1, 1}, {{0, 1}, {0, 1}});
  CHECK(predict_poisson(state_of({{2, 3}, {5, 7}}, 1.0), t2) == std::vector<double>{10, 21});
}

TEST_CASE("prediction excluding one family") {
  const std::vector<double> pi{10, 21};
  CHECK(predict_excluding(pi, std::vector<double>{1, 1}) == pi);
  CHECK(predict_excluding(pi, std::vector<double>{2, 3}) == std::vector<double>{5, 7});

  // Single family: removing it leaves β D.
  const auto t = table_of(ModelKind::poisson, {1.5, 2.5, 0.5}, {{0, 1, 0}});
  const auto s = state_of({{1.7, 0.3}}, 0.9);
  const auto pi1 = predict_poisson(s, t);
  const auto base = predict_excluding(pi1, gather(s.b[0], t.index[0]));
  for (std::size_t j = 0; j < 3; ++j) CHECK(base[j] == doctest::Approx(0.9 * t.d[j]).epsilon(1e-15));
}

TEST_CASE("sum by level") {
  const std::vector<LevelIndex> idx{0, 1, 0, 3, 4};
  CHECK(sum_by(idx, std::vector<double>{52, 73, 19, 532, 3}, 5) ==
        std::vector<double>{71, 73, 0, 532, 3});
  CHECK(sum_by(std::vector<LevelIndex>{0, 0, 0}, std::vector<double>{1, 2, 3.5}, 1) ==
        std::vector<double>{6.5});
  CHECK(sum_by(idx, std::vector<double>(5, 0.0), 5) == std::vector<double>(5, 0.0));
}

TEST_CASE("sum by is linear") {
  RngStream rng(31);
  const std::size_t n = 5000, levels = 17;
  std::vector<LevelIndex> idx(n);
  std::vector<double> u(n), v(n), mix(n);
  const double alpha = -2.75;
  for (std::size_t j = 0; j < n; ++j) {
    idx[j] = rng.next_u32() % levels;
    u[j] = rng.normal();
    v[j] = rng.normal();
    mix[j] = alpha * u[j] + v[j];
  }
  for (Summation mode : {Summation::naive, Summation::kahan, Summation::exact}) {
    const auto su = sum_by(idx, u, levels, mode), sv = sum_by(idx, v, levels, mode),
               sm = sum_by(idx, mix, levels, mode);
    for (std::size_t t = 0; t < levels; ++t) {
      const double expect = alpha * su[t] + sv[t];
      CHECK(std::fabs(sm[t] - expect) <= 1e-12 * (std::fabs(alpha * su[t]) + std::fabs(sv[t])));
    }
  }
}

TEST_CASE("gaussian prediction") {
  auto t = table_of(ModelKind::gaussian, {1, 1}, {{0, 0}});
  CHECK(gauss_predict(state_of({{0.0}}, 2.5), t) == std::vector<double>{2.5, 2.5});
  t.scale.emplace(1, std::vector<double>{2.0, -1.0});
  CHECK(gauss_predict(state_of({{1.5}}, 0.0), t) == std::vector<double>{3.0, -1.5});
  const auto t2 = table_of(ModelKind::gaussian, {1, 1}, {{0, 1}, {0, 1}});
  CHECK(gauss_predict(state_of({{1, 2}, {3, 4}}, 1.0), t2) == std::vector<double>{5, 7});
}

TEST_CASE("family updates patch the cache") {
  auto t = table_of(ModelKind::poisson, {1, 1}, {{0, 1}, {0, 1}});
  auto s = state_of({{2, 3}, {5, 7}}, 1.0);
  refresh_prediction(s, t);
  apply_family_update(s, 0, {4, 3}, t);
  CHECK(s.pi == std::vector<double>{20, 21});
  CHECK(s.refresh_counter == 1);

  auto g = table_of(ModelKind::gaussian, {1}, {{0}});
  g.scale.emplace(1, std::vector<double>{2.0});
  auto gs = state_of({{0.5}}, 0.0);
  refresh_prediction(gs, g);
  CHECK(gs.pi == std::vector<double>{1.0});
  apply_family_update(gs, 0, {0.7}, g);
  CHECK(gs.pi[0] == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("an unchanged family leaves the cache within two ulp") {
  RngStream rng(32);
  const std::size_t n = 1000;
  std::vector<double> d(n);
  std::vector<LevelIndex> idx(n);
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = std::exp(rng.normal());
    idx[j] = rng.next_u32() % 20;
  }
  auto t = table_of(ModelKind::poisson, d, {idx});
  std::vector<double> b(20);
  for (double& x : b) x = rng.gamma(2.0, 2.0);
  auto s = state_of({b}, 0.7);
  refresh_prediction(s, t);
  const auto before = s.pi;
  apply_family_update(s, 0, b, t, 1000);
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(std::fabs(s.pi[j] - before[j]) <= 2.0 * std::numeric_limits<double>::epsilon() * before[j]);
  }
  // Dividing the gather out and multiplying back in also stays within two ulp.
  const auto g = gather(b, idx);
  const auto ex = predict_excluding(before, g);
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(std::fabs(ex[j] * g[j] - before[j]) <= 2.0 * std::numeric_limits<double>::epsilon() * before[j]);
  }
}

TEST_CASE("cadence forces a full recompute") {
  auto t = table_of(ModelKind::poisson, {1, 2, 3}, {{0, 1, 1}});
  auto s = state_of({{1.0, 1.0}}, 1.0);
  refresh_prediction(s, t);
  apply_family_update(s, 0, {2.0, 3.0}, t, 2);
  CHECK(s.refresh_counter == 1);
  apply_family_update(s, 0, {5.0, 0.5}, t, 2);
  CHECK(s.refresh_counter == 0);
  CHECK(s.pi == predict_poisson(s, t));
}

TEST_CASE("randomized update sequences keep the cache within drift tolerance") {
  RngStream rng(33);
  const std::size_t n = 20000, families = 8;
  for (ModelKind kind : {ModelKind::poisson, ModelKind::gaussian}) {
    ObservationTable t;
    t.kind = kind;
    t.y.assign(n, 0.0);
    t.d.resize(n);
    t.index.assign(families, std::vector<LevelIndex>(n));
    std::vector<std::size_t> levels(families);
    for (std::size_t k = 0; k < families; ++k) levels[k] = 5 + rng.next_u32() % 200;
    for (std::size_t j = 0; j < n; ++j) {
      t.d[j] = std::exp(2.0 * rng.normal());
      for (std::size_t k = 0; k < families; ++k) t.index[k][j] = rng.next_u32() % levels[k];
    }
    if (kind == ModelKind::gaussian) {
      t.scale.emplace(families, std::vector<double>(n));
      for (auto& c : *t.scale) for (double& x : c) x = rng.normal();
    }
    ModelState s;
    s.beta = kind == ModelKind::poisson ? 0.3 : -1.0;
    for (std::size_t k = 0; k < families; ++k) s.b.emplace_back(levels[k], kind == ModelKind::poisson ? 1.0 : 0.0);
    refresh_prediction(s, t);
    for (int step = 0; step < 100; ++step) {
      const std::size_t k = rng.next_u32() % families;
      std::vector<double> b_new(levels[k]);
      for (double& x : b_new) x = kind == ModelKind::poisson ? rng.gamma(1.0, 1.0) : rng.normal(0.0, 2.0);
      apply_family_update(s, k, b_new, t, 1000);
    }
    const auto fresh = predict(s, t);
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double dev = kind == ModelKind::poisson ? std::fabs(s.pi[j] - fresh[j]) / fresh[j]
                                                    : std::fabs(s.pi[j] - fresh[j]) / (1.0 + std::fabs(fresh[j]));
      worst = std::max(worst, dev);
    }
    INFO(to_string(kind) << " drift " << worst);
    CHECK(worst <= 1e-8);
  }
}
