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

#include "blockgibbs/sigma_inference.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace blockgibbs {

SigmaGrid::SigmaGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("sigma grid is empty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] > 0.0) || !std::isfinite(points_[i])) {
      throw std::invalid_argument("sigma grid points must be finite and positive");
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw std::invalid_argument("sigma grid points must be strictly increasing");
    }
  }
}

SigmaGrid SigmaGrid::geometric(double lower, double upper, std::size_t count) {
  if (count == 1) return fixed(lower);
  if (count < 2 || !(lower > 0.0) || !(upper > lower)) {
    throw std::invalid_argument("geometric grid needs 0 < lower < upper and count >= 2");
  }
  std::vector<double> points(count);
  const double log_lower = std::log(lower);
  const double step = (std::log(upper) - log_lower) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    points[i] = std::exp(log_lower + step * static_cast<double>(i));
  }
  points.front() = lower;
  points.back() = upper;
  return SigmaGrid(std::move(points));
}

SigmaGrid SigmaGrid::fixed(double sigma) { return SigmaGrid(std::vector<double>{sigma}); }

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("cannot parse number '{}'", text));
  }
  return value;
}

}  // namespace

SigmaGrid parse_sigma_grid(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw std::invalid_argument("sigma grid must look like lower:upper:count");
  }
  const double lower = parse_double(text.substr(0, first));
  const double upper = parse_double(text.substr(first + 1, second - first - 1));
  const double count = parse_double(text.substr(second + 1));
  if (count < 1 || count != std::floor(count)) {
    throw std::invalid_argument("sigma grid count must be a positive integer");
  }
  if (count == 1) return SigmaGrid::fixed(lower);
  return SigmaGrid::geometric(lower, upper, static_cast<std::size_t>(count));
}

SigmaMethod parse_sigma_method(std::string_view text) {
  if (text == "grid" || text == "griddy") return SigmaMethod::grid;
  if (text == "mh") return SigmaMethod::mh;
  throw std::invalid_argument(fmt::format("unknown sigma method '{}'", text));
}

std::size_t griddy_draw_index(std::span<const double> log_density, RngStream& rng) {
  if (log_density.size() == 1) {
    if (std::isnan(log_density[0])) throw std::domain_error("sigma log-density is NaN");
    return 0;
  }
  try {
    return rng.categorical_log(log_density);
  } catch (const std::invalid_argument& e) {
    throw std::domain_error(fmt::format("degenerate sigma posterior: {}", e.what()));
  }
}

double griddy_draw(const LogDensity& log_marginal, const SigmaGrid& grid, RngStream& rng) {
  const auto points = grid.points();
  std::vector<double> log_density(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) log_density[i] = log_marginal(points[i]);
  return points[griddy_draw_index(log_density, rng)];
}

double mh_draw(double current, double step, const LogDensity& log_marginal, RngStream& rng,
               double lower, double upper) {
  if (!(current > 0.0)) throw std::invalid_argument("mh_draw needs a positive current sigma");
  if (step == 0.0) return current;
  const double lambda = std::log(current);
  const double proposal_lambda = lambda + step * rng.normal();
  const double proposal = std::exp(proposal_lambda);
  const double u = rng.uniform();
  if (proposal < lower || proposal > upper) return current;
  // The e^λ Jacobian turns the flat prior on σ into a density on λ.
  const double log_ratio =
      (log_marginal(proposal) + proposal_lambda) - (log_marginal(current) + lambda);
  return std::log(u) < log_ratio ? proposal : current;
}

double argmax_sigma(const LogDensity& objective, const SigmaGrid& grid) {
  const auto points = grid.points();
  double best = points[0];
  double best_value = objective(points[0]);
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double value = objective(points[i]);
    if (value > best_value || (std::isnan(best_value) && !std::isnan(value))) {
      best = points[i];
      best_value = value;
    }
  }
  return best;
}

double draw_sigma(double current, const LogDensity& log_marginal,
                  const SigmaSamplerConfig& config, RngStream& rng) {
  if (config.method == SigmaMethod::grid) return griddy_draw(log_marginal, config.grid, rng);
  return mh_draw(current, config.mh_step, log_marginal, rng, config.grid.lower(),
                 config.grid.upper());
}

}  // namespace blockgibbs
