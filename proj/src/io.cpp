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

#include "blockgibbs/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "blockgibbs/gaussian_sampler.hpp"
#include "blockgibbs/kernels.hpp"
#include "blockgibbs/poisson_sampler.hpp"

namespace blockgibbs {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::string number(double x) {
  if (std::isnan(x)) return "NA";
  return fmt::format("{}", x);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  return out;
}

// Welford accumulation of per-level effect draws.
struct EffectAccumulator {
  std::size_t n = 0;
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> m2;

  explicit EffectAccumulator(const ModelState& state) {
    for (const auto& b : state.b) {
      mean.emplace_back(b.size(), 0.0);
      m2.emplace_back(b.size(), 0.0);
    }
  }

  void add(const ModelState& state) {
    ++n;
    for (std::size_t k = 0; k < state.b.size(); ++k) {
      for (std::size_t t = 0; t < state.b[k].size(); ++t) {
        const double x = state.b[k][t];
        const double delta = x - mean[k][t];
        mean[k][t] += delta / static_cast<double>(n);
        m2[k][t] += delta * (x - mean[k][t]);
      }
    }
  }

  EffectSummary result() const {
    EffectSummary out{mean, m2};
    for (auto& family : out.sd) {
      for (double& v : family) {
        v = n > 1 ? std::sqrt(v / static_cast<double>(n - 1))
                  : std::numeric_limits<double>::quiet_NaN();
      }
    }
    return out;
  }
};

std::vector<std::string> trace_names(const RunConfig& config, std::size_t families) {
  std::vector<std::string> names{"beta"};
  for (std::size_t k = 0; k < families; ++k) names.push_back(fmt::format("sigma_{}", k + 1));
  for (std::size_t k = 0; k < config.priors.size(); ++k) {
    if (config.priors[k].kind == PriorKind::spike_slab) names.push_back(fmt::format("w_{}", k + 1));
  }
  return names;
}

std::vector<double> trace_row(const RunConfig& config, const ModelState& state) {
  std::vector<double> row{state.beta};
  row.insert(row.end(), state.sigma.begin(), state.sigma.end());
  for (std::size_t k = 0; k < config.priors.size(); ++k) {
    if (config.priors[k].kind == PriorKind::spike_slab) row.push_back(state.spike_weight[k]);
  }
  return row;
}

bool kept(const RunConfig& config, std::size_t i) {
  return i >= config.burn_in && (i - config.burn_in) % config.thin == 0;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::gibbs: return "gibbs";
    case Algorithm::mcem: return "mcem";
    case Algorithm::minimal_mcem: return "minimal-mcem";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "gibbs") return Algorithm::gibbs;
  if (text == "mcem") return Algorithm::mcem;
  if (text == "minimal-mcem") return Algorithm::minimal_mcem;
  throw std::invalid_argument(fmt::format("unknown algorithm '{}'", text));
}

std::vector<PriorSpec> parse_priors(std::string_view text, std::size_t families) {
  std::vector<PriorSpec> out;
  for (auto token : split(text)) {
    if (token == "conjugate") {
      out.push_back(PriorSpec::conjugate());
    } else if (token == "spike-slab") {
      out.push_back(PriorSpec::spike_slab());
    } else {
      throw std::invalid_argument(fmt::format("unknown prior '{}'", token));
    }
  }
  if (out.size() == 1 && families > 1) out.assign(families, out.front());
  if (out.size() != families) {
    throw std::invalid_argument(
        fmt::format("{} priors given for {} families", out.size(), families));
  }
  return out;
}

std::vector<std::string> validate(const RunConfig& config) {
  std::vector<std::string> out;
  if (config.families.empty()) out.emplace_back("at least one family column is required");
  if (config.algorithm == Algorithm::gibbs && config.iterations <= config.burn_in) {
    out.emplace_back("iterations must exceed burn-in");
  }
  if (config.iterations == 0) out.emplace_back("iterations must be positive");
  if (config.thin == 0) out.emplace_back("thinning must be at least 1");
  if (config.refresh_cadence == 0) out.emplace_back("refresh cadence must be at least 1");
  if (!config.scales.empty() && config.scales.size() != config.families.size()) {
    out.emplace_back("scale columns must match family columns one to one");
  }
  if (config.model == ModelKind::poisson && !config.scales.empty()) {
    out.emplace_back("scale columns apply to the Gaussian model only");
  }
  if (!config.priors.empty() && config.priors.size() != config.families.size()) {
    out.emplace_back("one prior per family is required");
  }
  const bool any_spike = std::any_of(config.priors.begin(), config.priors.end(),
                                     [](const PriorSpec& p) { return p.kind == PriorKind::spike_slab; });
  if (any_spike && config.model == ModelKind::gaussian) {
    out.emplace_back("spike-and-slab priors apply to the Poisson model only");
  }
  if (config.algorithm != Algorithm::gibbs) {
    if (config.model == ModelKind::gaussian) out.emplace_back("MCEM applies to the Poisson model only");
    if (any_spike) out.emplace_back("MCEM supports conjugate priors only");
    if (config.mcem_samples == 0) out.emplace_back("MCEM needs at least one inner sample");
  }
  if (!(config.sigma.mh_step > 0.0)) out.emplace_back("MH step must be positive");
  for (const auto& prior : config.priors) {
    for (const auto& v : validate(prior)) out.push_back(v.what);
  }
  return out;
}

Dataset ingest_table(std::istream& in, const RunConfig& config) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw IngestError(0, "empty file");
  // Owned copies: `line` is reused for the data rows.
  std::vector<std::string> header;
  for (auto name : split(line)) header.emplace_back(name);
  const auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IngestError(1, fmt::format("missing column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t y_col = column(config.response);
  const std::optional<std::size_t> d_col =
      config.offset.empty() ? std::nullopt : std::optional(column(config.offset));
  std::vector<std::size_t> family_cols, scale_cols;
  for (const auto& name : config.families) family_cols.push_back(column(name));
  for (const auto& name : config.scales) scale_cols.push_back(column(name));

  Dataset data;
  auto& table = data.table;
  table.kind = config.model;
  table.index.resize(family_cols.size());
  for (const auto& name : config.families) data.layout.add_family(name);
  if (!scale_cols.empty()) table.scale.emplace(scale_cols.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw IngestError(line_no, fmt::format("line {}: expected {} fields, found {}", line_no,
                                             header.size(), fields.size()));
    }
    const auto numeric = [&](std::size_t col) {
      auto value = parse_double(fields[col]);
      if (!value) {
        throw IngestError(line_no, fmt::format("line {}: cannot parse '{}' in column '{}'",
                                               line_no, fields[col], header[col]));
      }
      return *value;
    };
    table.y.push_back(numeric(y_col));
    table.d.push_back(d_col ? numeric(*d_col) : 1.0);
    for (std::size_t k = 0; k < family_cols.size(); ++k) {
      // Rows without a level in some family are not supported.
      if (fields[family_cols[k]].empty()) {
        throw IngestError(line_no, fmt::format("line {}: empty level in column '{}'", line_no,
                                               header[family_cols[k]]));
      }
      table.index[k].push_back(data.layout.encode(k, fields[family_cols[k]]));
    }
    for (std::size_t k = 0; k < scale_cols.size(); ++k) {
      (*table.scale)[k].push_back(numeric(scale_cols[k]));
    }
  }
  if (table.rows() == 0) throw IngestError(0, "no data rows");
  if (auto problems = validate(table, data.layout); !problems.empty()) {
    const auto& first = problems.front();
    if (first.row == Violation::npos) throw IngestError(0, first.what);
    // Data row j sits on file line j + 2 when no blank lines intervene.
    throw IngestError(first.row + 2, fmt::format("data row {}: {}", first.row + 1, first.what));
  }
  return data;
}

Dataset ingest_table(const std::string& path, const RunConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(0, fmt::format("cannot open {}", path));
  return ingest_table(in, config);
}

Simulation simulate(const SimulationSpec& spec) {
  if (spec.levels.empty() || spec.levels.size() != spec.sigma.size()) {
    throw std::invalid_argument("simulation needs one sigma per family");
  }
  if (spec.rows == 0 ||
      std::any_of(spec.levels.begin(), spec.levels.end(), [](std::size_t l) { return l == 0; })) {
    throw std::invalid_argument("simulation sizes must be positive");
  }
  if (!(spec.offset_low > 0.0) || !(spec.offset_high >= spec.offset_low)) {
    throw std::invalid_argument("offset range must be positive and ordered");
  }
  RngStream rng(spec.seed, 0, 0, static_cast<std::uint32_t>(StreamPhase::data) << 24);
  const std::size_t families = spec.levels.size();
  std::vector<std::string> names;
  for (std::size_t k = 0; k < families; ++k) names.push_back(fmt::format("f{}", k + 1));

  Simulation sim;
  sim.data.layout = FamilyLayout::with_level_counts(names, spec.levels);
  for (std::size_t k = 0; k < families; ++k) {
    const double sigma = spec.sigma[k];
    const double a = 1.0 / (sigma * sigma);
    std::vector<double> b(spec.levels[k]);
    for (double& v : b) v = spec.model == ModelKind::poisson ? rng.gamma(a, a) : rng.normal(0.0, sigma);
    sim.b.push_back(std::move(b));
  }

  auto& table = sim.data.table;
  table.kind = spec.model;
  table.y.resize(spec.rows);
  table.d.resize(spec.rows);
  table.index.assign(families, std::vector<LevelIndex>(spec.rows));
  if (spec.model == ModelKind::gaussian) table.scale.emplace(families, std::vector<double>(spec.rows));
  const double log_lo = std::log(spec.offset_low);
  const double log_span = std::log(spec.offset_high) - log_lo;
  for (std::size_t j = 0; j < spec.rows; ++j) {
    table.d[j] = std::exp(log_lo + log_span * rng.uniform());
    for (std::size_t k = 0; k < families; ++k) {
      table.index[k][j] = static_cast<LevelIndex>(
          std::min<double>(rng.uniform() * static_cast<double>(spec.levels[k]),
                           static_cast<double>(spec.levels[k] - 1)));
      if (table.scale) (*table.scale)[k][j] = 0.5 + rng.uniform();
    }
  }

  ModelState truth;
  truth.b = sim.b;
  truth.beta = spec.beta;
  const auto mean = predict(truth, table);
  for (std::size_t j = 0; j < spec.rows; ++j) {
    table.y[j] = spec.model == ModelKind::poisson
                     ? static_cast<double>(rng.poisson(mean[j]))
                     : rng.normal(mean[j], 1.0 / std::sqrt(table.d[j]));
  }
  return sim;
}

void write_dataset(std::ostream& out, const Simulation& sim) {
  const auto& table = sim.data.table;
  const auto& layout = sim.data.layout;
  const std::size_t families = layout.num_families();
  out << "y,d";
  for (std::size_t k = 0; k < families; ++k) out << ',' << layout.name(k);
  if (table.scale) {
    for (std::size_t k = 0; k < families; ++k) out << ",s" << k + 1;
  }
  out << '\n';
  for (std::size_t j = 0; j < table.rows(); ++j) {
    out << number(table.y[j]) << ',' << number(table.d[j]);
    for (std::size_t k = 0; k < families; ++k) out << ',' << layout.decode(k, table.index[k][j]);
    if (table.scale) {
      for (std::size_t k = 0; k < families; ++k) out << ',' << number((*table.scale)[k][j]);
    }
    out << '\n';
  }
}

void write_truth(std::ostream& out, const SimulationSpec& spec) {
  out << "parameter,value\n";
  out << "beta," << number(spec.beta) << '\n';
  for (std::size_t k = 0; k < spec.sigma.size(); ++k) {
    out << "sigma_" << k + 1 << ',' << number(spec.sigma[k]) << '\n';
  }
}

void write_truth_effects(std::ostream& out, const Simulation& sim) {
  const auto& layout = sim.data.layout;
  out << "family,level,value\n";
  for (std::size_t k = 0; k < sim.b.size(); ++k) {
    for (std::size_t t = 0; t < sim.b[k].size(); ++t) {
      out << layout.name(k) << ',' << layout.decode(k, static_cast<LevelIndex>(t)) << ','
          << number(sim.b[k][t]) << '\n';
    }
  }
}

void write_simulation(const std::string& dir, const SimulationSpec& spec, const Simulation& sim) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  auto data = open_output(root / "data.csv");
  write_dataset(data, sim);
  auto truth = open_output(root / "truth.csv");
  write_truth(truth, spec);
  auto effects = open_output(root / "truth_effects.csv");
  write_truth_effects(effects, sim);
}

FitOutput fit(const Dataset& data, const RunConfig& config, std::ostream& log) {
  if (auto problems = validate(config); !problems.empty()) {
    throw std::invalid_argument(problems.front());
  }
  const auto& table = data.table;
  const auto& layout = data.layout;
  const std::size_t families = layout.num_families();

  ScanConfig scan_config;
  scan_config.sigma = config.sigma;
  scan_config.refresh_cadence = config.refresh_cadence;
  scan_config.summation = config.summation;

  const double start_sigma =
      std::clamp(1.0, config.sigma.grid.lower(), config.sigma.grid.upper());
  ModelState state = initial_state(table, layout, start_sigma);
  RandomSource rng(config.seed);

  FitOutput output;
  output.trace = Trace(trace_names(config, families));
  EffectAccumulator effects(state);

  if (config.algorithm != Algorithm::gibbs) {
    if (config.algorithm == Algorithm::minimal_mcem) {
      for (std::size_t k = 0; k < families; ++k) {
        if (layout.num_levels(k) < 50) {
          fmt::print(log, "warning: family '{}' has {} levels; the single-sample MCEM variant "
                          "is noisy for small families\n", layout.name(k), layout.num_levels(k));
        }
      }
    }
    const PoissonSampler sampler(table, layout, {}, scan_config);
    McemConfig mcem;
    mcem.inner_samples = config.mcem_samples;
    mcem.max_iterations = config.iterations;
    mcem.grid = config.sigma.grid;
    const auto variant =
        config.algorithm == Algorithm::mcem ? McemVariant::blocked : McemVariant::minimal;
    const auto result = run_mcem(sampler, state, mcem, variant, rng,
                                 [&](std::size_t iter, const ScanRecord&) {
                                   output.trace.append(iter + 1, trace_row(config, state));
                                 });
    effects.add(state);
    output.converged = result.converged;
    fmt::print(log, "mcem: {} iterations, {}\n", result.trajectory.size(),
               result.converged ? "converged" : "iteration cap reached");
  } else if (config.model == ModelKind::poisson) {
    const PoissonSampler sampler(table, layout, config.priors, scan_config);
    for (std::size_t i = 0; i < config.iterations; ++i) {
      sampler.scan(state, rng);
      if (kept(config, i)) {
        output.trace.append(i + 1, trace_row(config, state));
        if (config.effects) effects.add(state);
      }
    }
  } else {
    const GaussianSampler sampler(table, layout, scan_config);
    for (std::size_t i = 0; i < config.iterations; ++i) {
      sampler.scan(state, rng);
      if (kept(config, i)) {
        output.trace.append(i + 1, trace_row(config, state));
        if (config.effects) effects.add(state);
      }
    }
  }
  output.effects = effects.result();
  return output;
}

void write_draws(std::ostream& out, const Trace& trace) {
  out << "iter";
  for (const auto& name : trace.names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < trace.length(); ++i) {
    out << trace.iterations[i];
    for (const auto& column : trace.columns) out << ',' << number(column[i]);
    out << '\n';
  }
}

void write_summary(std::ostream& out, const std::vector<ParameterSummary>& rows) {
  out << "parameter,mean,sd,q2.5,q50,q97.5,ess\n";
  for (const auto& r : rows) {
    out << r.name << ',' << number(r.mean) << ',' << number(r.sd) << ',' << number(r.q025) << ','
        << number(r.q50) << ',' << number(r.q975) << ',' << number(r.ess) << '\n';
  }
}

void write_effects(std::ostream& out, const Dataset& data, const EffectSummary& effects) {
  out << "family,level,mean,sd\n";
  for (std::size_t k = 0; k < effects.mean.size(); ++k) {
    for (std::size_t t = 0; t < effects.mean[k].size(); ++t) {
      out << data.layout.name(k) << ',' << data.layout.decode(k, static_cast<LevelIndex>(t)) << ','
          << number(effects.mean[k][t]) << ',' << number(effects.sd[k][t]) << '\n';
    }
  }
}

int run_fit(const RunConfig& config, std::ostream& log) {
  try {
    if (auto problems = validate(config); !problems.empty()) {
      for (const auto& p : problems) fmt::print(log, "error: {}\n", p);
      return 2;
    }
    const auto started = std::chrono::steady_clock::now();
    const Dataset data = ingest_table(config.data, config);
    fmt::print(log, "ingested {} rows, {} families\n", data.table.rows(),
               data.layout.num_families());
    const FitOutput result = fit(data, config, log);

    const std::filesystem::path root(config.out);
    std::filesystem::create_directories(root);
    auto draws = open_output(root / "draws.csv");
    write_draws(draws, result.trace);

    std::vector<ParameterSummary> summary;
    if (config.algorithm == Algorithm::gibbs) {
      summary = summarize(result.trace);
    } else {
      // Point estimates: the final MCEM iterate.
      const double na = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t p = 0; p < result.trace.names.size(); ++p) {
        summary.push_back({result.trace.names[p], result.trace.columns[p].back(), na, na, na, na, na});
      }
    }
    auto summary_out = open_output(root / "summary.csv");
    write_summary(summary_out, summary);

    if (config.effects) {
      auto effects_out = open_output(root / "effects_summary.csv");
      write_effects(effects_out, data, result.effects);
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    fmt::print(log, "{}: {} draws written to {} in {:.2f}s\n", to_string(config.algorithm),
               result.trace.length(), root.string(), elapsed.count());
    return 0;
  } catch (const IngestError& e) {
    fmt::print(log, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(log, "error: {}\n", e.what());
    return 1;
  }
}

void write_geweke(std::ostream& out, const std::vector<GewekeStatistic>& stats) {
  out << "statistic,marginal_mean,successive_mean,z\n";
  for (const auto& s : stats) {
    out << s.name << ',' << number(s.marginal_mean) << ',' << number(s.successive_mean) << ','
        << number(s.z) << '\n';
  }
}

int run_check(const CheckConfig& config, std::ostream& log) {
  try {
    const auto stats = geweke_check(config.geweke);
    const std::filesystem::path root(config.out);
    std::filesystem::create_directories(root);
    auto out = open_output(root / "geweke.csv");
    write_geweke(out, stats);
    int failures = 0;
    for (const auto& s : stats) {
      const bool bad = !(std::fabs(s.z) <= config.threshold);
      if (bad) ++failures;
      fmt::print(log, "{:<16} z = {:>8.3f}{}\n", s.name, s.z, bad ? "  FAIL" : "");
    }
    fmt::print(log, "{} of {} statistics beyond |z| = {}\n", failures, stats.size(),
               config.threshold);
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    fmt::print(log, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace blockgibbs
