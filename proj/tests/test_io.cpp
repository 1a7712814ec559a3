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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "blockgibbs/io.hpp"

using namespace blockgibbs;
namespace fs = std::filesystem;

namespace {

const char* kAds =
    "n.views,n.actions,url,ad.id\n"
    "52,4,abc.com,83473\n"
    "73,5,xyz.edu,40983\n"
    "19,0,abc.com,4658\n"
    "532,16,efg.com,40983\n"
    "3,0,z.com,4658\n";

RunConfig ad_config() {
  RunConfig config;
  config.response = "n.actions";
  config.offset = "n.views";
  config.families = {"url", "ad.id"};
  return config;
}

Dataset ingest_text(const std::string& text, const RunConfig& config) {
  std::istringstream in(text);
  return ingest_table(in, config);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("blockgibbs_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t ingest_error_line(const std::string& text, const RunConfig& config) {
  try {
    ingest_text(text, config);
  } catch (const IngestError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("ingest numbers levels by first appearance") {
  const auto data = ingest_text(kAds, ad_config());
  CHECK(data.layout.num_families() == 2);
  CHECK(data.layout.num_levels(0) == 4);
  CHECK(data.layout.num_levels(1) == 3);
  CHECK(data.table.index[0] == std::vector<LevelIndex>{0, 1, 0, 2, 3});
  CHECK(data.table.index[1] == std::vector<LevelIndex>{0, 1, 2, 1, 2});
  CHECK(data.table.y == std::vector<double>{4, 5, 0, 16, 0});
  CHECK(data.table.d == std::vector<double>{52, 73, 19, 532, 3});
  CHECK(data.layout.decode(0, 2) == "efg.com");
  CHECK(data.layout.decode(1, 0) == "83473");
  CHECK(!data.table.has_scale());
}

TEST_CASE("missing offset column means unit offsets") {
  auto config = ad_config();
  config.offset.clear();
  CHECK(ingest_text(kAds, config).table.d == std::vector<double>(5, 1.0));
}

TEST_CASE("ingest errors") {
  const auto config = ad_config();
  CHECK_THROWS_AS(ingest_text("", config), IngestError);
  CHECK_THROWS_WITH_AS(ingest_text("n.views,n.actions,url,ad.id\n", config), "no data rows", IngestError);
  auto missing = config;
  missing.families = {"url", "campaign"};
  CHECK_THROWS_WITH_AS(ingest_text(kAds, missing), "missing column 'campaign'", IngestError);

  std::string bad = kAds;
  bad.replace(bad.find("532"), 3, "5x2");
  CHECK(ingest_error_line(bad, config) == 5);
  CHECK_THROWS_WITH_AS(ingest_text(bad, config), doctest::Contains("line 5"), IngestError);
  CHECK_THROWS_WITH_AS(ingest_text(bad, config), doctest::Contains("column 'n.views'"), IngestError);

  std::string negative = kAds;
  negative.replace(negative.find(",5,"), 3, ",-5,");
  CHECK_THROWS_WITH_AS(ingest_text(negative, config), doctest::Contains("negative count"), IngestError);

  CHECK_THROWS_AS(ingest_text("n.views,n.actions,url,ad.id\n1,2,a\n", config), IngestError);
  CHECK_THROWS_WITH_AS(ingest_text("n.views,n.actions,url,ad.id\n1,2,a,\n", config),
                       doctest::Contains("empty level in column 'ad.id'"), IngestError);
  CHECK_THROWS_AS(ingest_table(std::string("/nonexistent/file.csv"), config), IngestError);
}

TEST_CASE("gaussian ingest reads scale columns") {
  RunConfig config;
  config.model = ModelKind::gaussian;
  config.response = "y";
  config.offset = "w";
  config.families = {"g"};
  config.scales = {"s"};
  const auto data = ingest_text("y,w,g,s\n-1.5,2,a,0.5\n2.25,1,b,-1\n0,0.5,a,2\n", config);
  CHECK(data.table.y == std::vector<double>{-1.5, 2.25, 0.0});
  REQUIRE(data.table.has_scale());
  CHECK((*data.table.scale)[0] == std::vector<double>{0.5, -1.0, 2.0});
}

TEST_CASE("row permutations permute the index identically") {
  const std::string permuted =
      "n.views,n.actions,url,ad.id\n"
      "532,16,efg.com,40983\n"
      "3,0,z.com,4658\n"
      "52,4,abc.com,83473\n"
      "19,0,abc.com,4658\n"
      "73,5,xyz.edu,40983\n";
  const auto a = ingest_text(kAds, ad_config());
  const auto b = ingest_text(permuted, ad_config());
  const std::vector<std::size_t> perm{3, 4, 0, 2, 1};
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(b.layout.decode(k, b.table.index[k][j]) == a.layout.decode(k, a.table.index[k][perm[j]]));
    }
  }
  CHECK(b.layout.labels(0) == std::vector<std::string>{"efg.com", "z.com", "abc.com", "xyz.edu"});
}

TEST_CASE("config validation and parsing") {
  RunConfig config = ad_config();
  CHECK(validate(config).empty());
  config.iterations = 10;
  config.burn_in = 10;
  CHECK(!validate(config).empty());
  config.burn_in = 0;
  config.thin = 0;
  CHECK(!validate(config).empty());
  config.thin = 1;
  config.families.clear();
  CHECK(!validate(config).empty());
  config = ad_config();
  config.model = ModelKind::gaussian;
  config.algorithm = Algorithm::mcem;
  CHECK(!validate(config).empty());

  CHECK(parse_priors("spike-slab", 3).size() == 3);
  CHECK(parse_priors("conjugate,spike-slab", 2)[1].kind == PriorKind::spike_slab);
  CHECK_THROWS(parse_priors("conjugate,conjugate", 3));
  CHECK_THROWS(parse_priors("horseshoe", 1));
  CHECK(parse_algorithm("minimal-mcem") == Algorithm::minimal_mcem);
  CHECK(to_string(Algorithm::mcem) == "mcem");
}

TEST_CASE("simulation") {
  SimulationSpec spec;
  spec.rows = 5;
  spec.levels = {3, 2};
  spec.sigma = {0.5, 1.0};
  spec.seed = 101;
  std::ostringstream a, b;
  write_dataset(a, simulate(spec));
  write_dataset(b, simulate(spec));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("y,d,f1,f2\n", 0) == 0);

  // Nearly degenerate prior: effects sit at one and means are β D.
  spec.rows = 2000;
  spec.levels = {5};
  spec.sigma = {1e-4};
  spec.beta = 2.0;
  const auto sim = simulate(spec);
  for (double b : sim.b[0]) CHECK(b == doctest::Approx(1.0).epsilon(1e-3));
  double y = 0.0, mu = 0.0;
  for (std::size_t j = 0; j < spec.rows; ++j) {
    y += sim.data.table.y[j];
    mu += 2.0 * sim.data.table.d[j];
    CHECK(sim.data.table.d[j] >= 1.0);
    CHECK(sim.data.table.d[j] <= 1000.0);
  }
  CHECK(y == doctest::Approx(mu).epsilon(0.01));
}

TEST_CASE("simulated effect variance matches sigma squared") {
  for (double sigma : {0.3, 0.7, 1.2}) {
    SimulationSpec spec;
    spec.rows = 1;
    spec.levels = {100000};
    spec.sigma = {sigma};
    spec.seed = 102;
    const auto sim = simulate(spec);
    double m = 0.0, v = 0.0;
    for (double b : sim.b[0]) m += b;
    m /= sim.b[0].size();
    for (double b : sim.b[0]) v += (b - m) * (b - m);
    v /= sim.b[0].size() - 1;
    CHECK(v == doctest::Approx(sigma * sigma).epsilon(0.05));
  }
}

TEST_CASE("fit writes draws and summaries") {
  const auto dir = scratch("fit");
  {
    std::ofstream out(dir / "ads.csv");
    out << kAds;
  }
  RunConfig config = ad_config();
  config.data = (dir / "ads.csv").string();
  config.iterations = 21;
  config.burn_in = 20;
  config.out = (dir / "one").string();
  std::ostringstream log;
  REQUIRE(run_fit(config, log) == 0);
  const auto draws = slurp(dir / "one" / "draws.csv");
  CHECK(draws.rfind("iter,beta,sigma_1,sigma_2\n21,", 0) == 0);
  CHECK(std::count(draws.begin(), draws.end(), '\n') == 2);
  CHECK(fs::exists(dir / "one" / "summary.csv"));
  CHECK(!fs::exists(dir / "one" / "effects_summary.csv"));

  config.iterations = 300;
  config.burn_in = 100;
  config.thin = 4;
  config.effects = true;
  config.out = (dir / "a").string();
  REQUIRE(run_fit(config, log) == 0);
  config.out = (dir / "b").string();
  REQUIRE(run_fit(config, log) == 0);
  const auto da = slurp(dir / "a" / "draws.csv");
  CHECK(da == slurp(dir / "b" / "draws.csv"));
  CHECK(std::count(da.begin(), da.end(), '\n') == 1 + 50);
  const auto summary = slurp(dir / "a" / "summary.csv");
  CHECK(summary.rfind("parameter,mean,sd,q2.5,q50,q97.5,ess\nbeta,", 0) == 0);
  const auto effects = slurp(dir / "a" / "effects_summary.csv");
  CHECK(effects.rfind("family,level,mean,sd\nurl,abc.com,", 0) == 0);

  config.priors = parse_priors("conjugate,spike-slab", 2);
  config.out = (dir / "spike").string();
  REQUIRE(run_fit(config, log) == 0);
  CHECK(slurp(dir / "spike" / "draws.csv").rfind("iter,beta,sigma_1,sigma_2,w_2\n", 0) == 0);

  config.priors.clear();
  config.algorithm = Algorithm::minimal_mcem;
  config.iterations = 50;
  config.burn_in = 0;
  config.thin = 1;
  config.out = (dir / "mcem").string();
  log.str("");
  REQUIRE(run_fit(config, log) == 0);
  CHECK(log.str().find("warning") != std::string::npos);

  config.data = (dir / "missing.csv").string();
  CHECK(run_fit(config, log) != 0);
}

TEST_CASE("check exit codes") {
  const auto dir = scratch("check");
  CheckConfig config;
  config.geweke.draws = 1500;
  config.out = dir.string();
  std::ostringstream log;
  CHECK(run_check(config, log) == 0);
  CHECK(slurp(dir / "geweke.csv").rfind("statistic,marginal_mean,successive_mean,z\n", 0) == 0);
  config.threshold = 0.0;
  CHECK(run_check(config, log) != 0);
  config.threshold = 5.0;
  config.geweke.stats_fault = 2.0;
  CHECK(run_check(config, log) != 0);
}
