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

// blockgibbs: fit, simulate and self-check crossed random effects models.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "blockgibbs/io.hpp"

namespace {

using namespace blockgibbs;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = std::min(text.find(',', start), text.size());
    if (pos > start) out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) {
    if constexpr (std::is_same_v<T, double>) {
      out.push_back(std::stod(item));
    } else {
      out.push_back(static_cast<T>(std::stoull(item)));
    }
  }
  return out;
}

// A config file is a list of key=value lines naming long options. Its
// entries are placed ahead of the real arguments so the command line wins.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      line = line.substr(first, last - first + 1);
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--config", "expected key=value: " + line);
      auto key = line.substr(0, eq);
      auto value = line.substr(eq + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      entries.push_back(fmt::format("--{}={}", key, value));
    }
    // Insert right after the subcommand name, or at the front if none yet.
    const auto at = out.empty() ? out.begin() : out.begin() + 1;
    out.insert(at, entries.begin(), entries.end());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blocked Gibbs sampling for crossed random effects"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // fit
  RunConfig run;
  std::string model = "poisson", families, scales, sigma_method = "grid", sigma_grid,
              algorithm = "gibbs", priors, summation = "exact";
  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV file");
  fit->add_option("--config", "key=value file of default options");
  fit->add_option("--model", model, "poisson | gaussian")->capture_default_str();
  fit->add_option("--data", run.data, "Input CSV")->required();
  fit->add_option("--response", run.response, "Response column")->capture_default_str();
  fit->add_option("--offset", run.offset, "Offset (Poisson) or weight (Gaussian) column");
  fit->add_option("--families", families, "Comma-separated family columns")->required();
  fit->add_option("--scales", scales, "Comma-separated scale columns (Gaussian)");
  fit->add_option("--iters", run.iterations, "Scans (outer iterations for MCEM)")->capture_default_str();
  fit->add_option("--burnin", run.burn_in, "Scans discarded before recording")->capture_default_str();
  fit->add_option("--thin", run.thin, "Keep every n-th scan")->capture_default_str();
  fit->add_option("--seed", run.seed)->capture_default_str();
  fit->add_option("--sigma-method", sigma_method, "grid | mh")->capture_default_str();
  auto* grid_opt = fit->add_option("--sigma-grid", sigma_grid, "lo:hi:count, geometric spacing");
  fit->add_option("--mh-step", run.sigma.mh_step, "Random-walk scale on log sigma")->capture_default_str();
  fit->add_option("--refresh-cadence", run.refresh_cadence, "Updates between full recomputes of the prediction cache")
      ->capture_default_str();
  fit->add_option("--algorithm", algorithm, "gibbs | mcem | minimal-mcem")->capture_default_str();
  fit->add_option("--mcem-samples", run.mcem_samples, "Inner passes per family for mcem")->capture_default_str();
  fit->add_option("--priors", priors, "conjugate | spike-slab, one or one per family");
  fit->add_option("--summation", summation, "exact | kahan | naive")->capture_default_str();
  fit->add_flag("--effects", run.effects, "Also write effects_summary.csv");
  fit->add_option("--out", run.out, "Output directory")->capture_default_str();

  // simulate
  SimulationSpec sim;
  std::string sim_model = "poisson", sim_levels = "10", sim_sigma = "1", sim_out = ".";
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a dataset with known parameters");
  simulate_cmd->add_option("--config", "key=value file of default options");
  simulate_cmd->add_option("--model", sim_model)->capture_default_str();
  simulate_cmd->add_option("--rows", sim.rows)->capture_default_str();
  simulate_cmd->add_option("--levels", sim_levels, "Comma-separated level counts")->capture_default_str();
  simulate_cmd->add_option("--sigma", sim_sigma, "Comma-separated true sigma per family")->capture_default_str();
  simulate_cmd->add_option("--beta", sim.beta)->capture_default_str();
  simulate_cmd->add_option("--offset-low", sim.offset_low)->capture_default_str();
  simulate_cmd->add_option("--offset-high", sim.offset_high)->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed)->capture_default_str();
  simulate_cmd->add_option("--out", sim_out, "Output directory")->capture_default_str();

  // check
  CheckConfig check;
  std::string check_model = "poisson", check_levels = "10,10";
  auto* check_cmd = app.add_subcommand("check", "Run the Geweke self-test of the samplers");
  check_cmd->add_option("--config", "key=value file of default options");
  check_cmd->add_option("--model", check_model)->capture_default_str();
  check_cmd->add_option("--rows", check.geweke.rows)->capture_default_str();
  check_cmd->add_option("--levels", check_levels)->capture_default_str();
  check_cmd->add_option("--draws", check.geweke.draws)->capture_default_str();
  check_cmd->add_option("--seed", check.geweke.seed)->capture_default_str();
  check_cmd->add_option("--threshold", check.threshold, "Largest acceptable |z|")->capture_default_str();
  check_cmd->add_option("--out", check.out, "Output directory")->capture_default_str();
  check_cmd->add_option("--inject-fault", check.geweke.stats_fault)->group("");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fit) {
      run.model = parse_model_kind(model);
      run.families = split_list(families);
      run.scales = split_list(scales);
      run.sigma.method = parse_sigma_method(sigma_method);
      run.algorithm = parse_algorithm(algorithm);
      run.summation = parse_summation(summation);
      if (grid_opt->count() > 0) {
        run.sigma.grid = parse_sigma_grid(sigma_grid);
      } else if (run.algorithm != Algorithm::gibbs) {
        run.sigma.grid = McemConfig{}.grid;
      }
      if (!priors.empty()) run.priors = parse_priors(priors, run.families.size());
      return run_fit(run, std::cerr);
    }
    if (*simulate_cmd) {
      sim.model = parse_model_kind(sim_model);
      sim.levels = parse_list<std::size_t>(sim_levels);
      sim.sigma = parse_list<double>(sim_sigma);
      write_simulation(sim_out, sim, simulate(sim));
      std::cerr << fmt::format("wrote {} rows to {}\n", sim.rows, sim_out);
      return 0;
    }
    check.geweke.model = parse_model_kind(check_model);
    check.geweke.levels = parse_list<std::size_t>(check_levels);
    return run_check(check, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
