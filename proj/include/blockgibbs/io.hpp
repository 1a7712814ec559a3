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

#ifndef BLOCKGIBBS_IO_HPP
#define BLOCKGIBBS_IO_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "blockgibbs/data_model.hpp"
#include "blockgibbs/diagnostics.hpp"
#include "blockgibbs/mcem.hpp"
#include "blockgibbs/sampler_common.hpp"

namespace blockgibbs {

enum class Algorithm { gibbs, mcem, minimal_mcem };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

struct RunConfig {
  ModelKind model = ModelKind::poisson;
  std::string data;
  std::string response = "y";
  // Empty means D = 1 for every row.
  std::string offset;
  std::vector<std::string> families;
  std::vector<std::string> scales;
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  SigmaSamplerConfig sigma;
  std::size_t refresh_cadence = kDefaultRefreshCadence;
  Summation summation = Summation::exact;
  // One entry per family, or empty for conjugate priors throughout.
  std::vector<PriorSpec> priors;
  Algorithm algorithm = Algorithm::gibbs;
  // Inner passes T of the blocked MCEM variant. For MCEM `iterations` caps
  // the outer loop and `sigma.grid` is the M-step grid.
  std::size_t mcem_samples = 5;
  bool effects = false;
  std::string out = ".";
};

// Problems with the configuration, empty when it is usable.
std::vector<std::string> validate(const RunConfig& config);

// Parses a per-family prior list such as "conjugate,spike-slab". A single
// entry applies to every family.
std::vector<PriorSpec> parse_priors(std::string_view text, std::size_t families);

// Thrown for malformed input files. `line` is 1-based including the header,
// 0 when the problem is not tied to a line.
class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t line, const std::string& what)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Dataset {
  ObservationTable table;
  FamilyLayout layout;
};

// Reads a comma-separated file with a header row. Levels are numbered per
// family in order of first appearance.
Dataset ingest_table(std::istream& in, const RunConfig& config);
Dataset ingest_table(const std::string& path, const RunConfig& config);

struct SimulationSpec {
  ModelKind model = ModelKind::poisson;
  std::size_t rows = 1000;
  std::vector<std::size_t> levels{10};
  std::vector<double> sigma{1.0};
  double beta = 1.0;
  // Offsets are log-uniform on [offset_low, offset_high].
  double offset_low = 1.0;
  double offset_high = 1000.0;
  std::uint64_t seed = 1;
};

struct Simulation {
  Dataset data;
  // True effects, b[k][t] with t the layout index.
  std::vector<std::vector<double>> b;
};

Simulation simulate(const SimulationSpec& spec);

// Data columns are y, d, f1..fF and, for Gaussian models, s1..sF.
void write_dataset(std::ostream& out, const Simulation& sim);
// Rows "parameter,value" for beta and sigma_1..sigma_F.
void write_truth(std::ostream& out, const SimulationSpec& spec);
// Rows "family,level,value".
void write_truth_effects(std::ostream& out, const Simulation& sim);
// Writes data.csv, truth.csv and truth_effects.csv into `dir`.
void write_simulation(const std::string& dir, const SimulationSpec& spec, const Simulation& sim);

struct EffectSummary {
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> sd;
};

struct FitOutput {
  // Kept draws: beta, sigma_1..sigma_F, then w_k for spike-and-slab families.
  Trace trace;
  EffectSummary effects;
  // MCEM only.
  bool converged = false;
};

FitOutput fit(const Dataset& data, const RunConfig& config, std::ostream& log);

void write_draws(std::ostream& out, const Trace& trace);
void write_summary(std::ostream& out, const std::vector<ParameterSummary>& rows);
void write_effects(std::ostream& out, const Dataset& data, const EffectSummary& effects);

// Ingests, fits and writes draws.csv, summary.csv and (optionally)
// effects_summary.csv under config.out. Returns the process exit code.
int run_fit(const RunConfig& config, std::ostream& log);

struct CheckConfig {
  GewekeConfig geweke;
  double threshold = 5.0;
  std::string out = ".";
};

void write_geweke(std::ostream& out, const std::vector<GewekeStatistic>& stats);

// Writes geweke.csv; returns 1 if any |z| exceeds the threshold or is NaN.
int run_check(const CheckConfig& config, std::ostream& log);

}  // namespace blockgibbs

#endif  // BLOCKGIBBS_IO_HPP
