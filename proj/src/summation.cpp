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

#include "blockgibbs/summation.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace blockgibbs {

Summation parse_summation(std::string_view text) {
  if (text == "naive") return Summation::naive;
  if (text == "kahan") return Summation::kahan;
  if (text == "exact") return Summation::exact;
  throw std::invalid_argument("unknown summation mode '" + std::string(text) + "'");
}

namespace {

// One pass of Shewchuk's grow-expansion over p[0..n); returns new count.
// Writes never run ahead of reads, so the update is done in place.
inline std::size_t grow(double* p, std::size_t n, double& x) {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double y = p[i];
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) p[kept++] = lo;
    x = hi;
  }
  return kept;
}

}  // namespace

void ExactAccumulator::add(double x) {
  if (spill_.empty()) {
    std::size_t kept = grow(inline_.data(), count_, x);
    if (kept < kInline) {
      inline_[kept++] = x;
      count_ = static_cast<std::uint8_t>(kept);
      return;
    }
    spill_.assign(inline_.begin(), inline_.begin() + kept);
    spill_.push_back(x);
    count_ = 0;
    return;
  }
  const std::size_t kept = grow(spill_.data(), spill_.size(), x);
  spill_.resize(kept);
  spill_.push_back(x);
}

double ExactAccumulator::round_partials(const double* p, std::size_t n) {
  // Same final rounding as CPython's math.fsum: add from the top partial
  // down until the sum becomes inexact, then fix round-half-even ties.
  if (n == 0) return 0.0;
  double hi = p[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = p[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

double ExactAccumulator::result() const {
  if (spill_.empty()) return round_partials(inline_.data(), count_);
  return round_partials(spill_.data(), spill_.size());
}

double exact_sum(std::span<const double> values) {
  ExactAccumulator acc;
  for (double v : values) acc.add(v);
  return acc.result();
}

}  // namespace blockgibbs
