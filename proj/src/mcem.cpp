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

#include "blockgibbs/mcem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace blockgibbs {

namespace {

void require_conjugate(const PoissonSampler& sampler) {
  for (const auto& prior : sampler.priors()) {
    if (prior.kind != PriorKind::conjugate) {
      throw std::invalid_argument("MCEM supports conjugate Gamma priors only");
    }
  }
  if (sampler.config().stats_fault != 1.0) {
    throw std::invalid_argument("MCEM does not support fault injection");
  }
}

}  // namespace

void beta_ratio_update(ModelState& state, double total_events) {
  const double total_pi = exact_sum(state.pi);
  if (!(total_pi > 0.0) || !(total_events > 0.0)) return;
  const double ratio = total_events / total_pi;
  for (double& p : state.pi) p *= ratio;
  state.beta *= ratio;
}

ScanRecord mcem_scan(const PoissonSampler& sampler, ModelState& state,
                     const McemConfig& config, RandomSource& rng) {
  require_conjugate(sampler);
  if (config.inner_samples < 1) throw std::invalid_argument("MCEM needs T >= 1");
  const auto& table = sampler.table();
  const std::size_t families = sampler.layout().num_families();
  for (std::size_t k = 0; k < families; ++k) {
    std::vector<FamilySuffStats> samples;
    samples.reserve(config.inner_samples);
    for (std::size_t s = 0; s < config.inner_samples; ++s) {
      refresh_prediction(state, table);
      for (std::size_t f = 0; f < families; ++f) {
        sampler.update_effects(f, state, sampler.stats(f, state), rng);
      }
      samples.push_back(sampler.stats(k, state));
      rng.next_epoch();
    }
    state.sigma[k] = argmax_sigma(
        [&samples](double v) {
          double total = 0.0;
          for (const auto& stats : samples) total += log_conjugate_marginal(v, stats);
          return total;
        },
        config.grid);
  }
  beta_ratio_update(state, sampler.total_events());
  return record_of(state);
}

ScanRecord minimal_mcem_scan(const PoissonSampler& sampler, ModelState& state,
                             const McemConfig& config, RandomSource& rng) {
  require_conjugate(sampler);
  refresh_prediction(state, sampler.table());
  for (std::size_t k = 0; k < sampler.layout().num_families(); ++k) {
    const FamilySuffStats stats = sampler.stats(k, state);
    state.sigma[k] = argmax_sigma(
        [&stats](double v) { return log_conjugate_marginal(v, stats); }, config.grid);
    sampler.update_effects(k, state, stats, rng);
  }
  beta_ratio_update(state, sampler.total_events());
  rng.next_epoch();
  return record_of(state);
}

McemResult run_mcem(const PoissonSampler& sampler, ModelState& state, const McemConfig& config,
                    McemVariant variant, RandomSource& rng,
                    const std::function<void(std::size_t, const ScanRecord&)>& on_iteration) {
  McemResult result;
  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    const std::vector<double> previous = state.sigma;
    ScanRecord record = variant == McemVariant::blocked
                            ? mcem_scan(sampler, state, config, rng)
                            : minimal_mcem_scan(sampler, state, config, rng);
    double change = 0.0;
    for (std::size_t k = 0; k < previous.size(); ++k) {
      change = std::max(change, std::fabs(state.sigma[k] - previous[k]) / previous[k]);
    }
    if (on_iteration) on_iteration(iter, record);
    result.trajectory.push_back(std::move(record));
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace blockgibbs
