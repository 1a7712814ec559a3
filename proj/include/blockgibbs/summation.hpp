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

#ifndef BLOCKGIBBS_SUMMATION_HPP
#define BLOCKGIBBS_SUMMATION_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace blockgibbs {

// naive: sequential double accumulation.
// kahan: Neumaier-compensated accumulation.
// exact: the correctly rounded exact sum, so independent of input order.
enum class Summation { naive, kahan, exact };

Summation parse_summation(std::string_view text);

// Shewchuk's non-overlapping partials. The first few partials live inline;
// sums that need more spill to the heap, which is rare in practice.
class ExactAccumulator {
 public:
  void add(double x);
  double result() const;

 private:
  static constexpr std::size_t kInline = 4;
  static double round_partials(const double* p, std::size_t n);

  std::array<double, kInline> inline_{};
  std::uint8_t count_ = 0;
  std::vector<double> spill_;
};

double exact_sum(std::span<const double> values);

// Per-group sums of value(j) over rows j with group[j] == t.
template <typename ValueFn>
std::vector<double> grouped_sum(std::span<const std::uint32_t> group, std::size_t groups,
                                Summation mode, ValueFn&& value) {
  std::vector<double> out(groups, 0.0);
  const std::size_t n = group.size();
  switch (mode) {
    case Summation::naive:
      for (std::size_t j = 0; j < n; ++j) out[group[j]] += value(j);
      break;
    case Summation::kahan: {
      std::vector<double> carry(groups, 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint32_t t = group[j];
        const double x = value(j);
        const double s = out[t] + x;
        if (std::fabs(out[t]) >= std::fabs(x)) {
          carry[t] += (out[t] - s) + x;
        } else {
          carry[t] += (x - s) + out[t];
        }
        out[t] = s;
      }
      for (std::size_t t = 0; t < groups; ++t) out[t] += carry[t];
      break;
    }
    case Summation::exact: {
      std::vector<ExactAccumulator> acc(groups);
      for (std::size_t j = 0; j < n; ++j) acc[group[j]].add(value(j));
      for (std::size_t t = 0; t < groups; ++t) out[t] = acc[t].result();
      break;
    }
  }
  return out;
}

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_SUMMATION_HPP
