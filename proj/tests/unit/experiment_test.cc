// Copyright 2026 The CommCorr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "commcorr/experiment/analysis.h"
#include "commcorr/experiment/config.h"
#include "commcorr/experiment/plot.h"
#include "commcorr/experiment/runner.h"

using namespace commcorr;
using namespace commcorr::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("commcorr_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json TinyConfig(const std::string& out) {
  return json{{"scenario", {{"name", "coop_comm"}, {"n_landmarks", 3}}},
              {"variant", "maddpg+occ"},
              {"train", {{"batch_size", 64}, {"episodes", 12}, {"hidden", {16, 16}}}},
              {"seeds", {3, 4}},
              {"out", out},
              {"early_episodes", 6},
              {"eval_every", 6},
              {"eval_episodes", 3}};
}

void WriteMetrics(const fs::path& p, const std::vector<std::vector<double>>& per_seed) {
  std::ofstream o(p);
  o << "seed,episode,team_team\n";
  for (size_t s = 0; s < per_seed.size(); ++s) {
    for (size_t e = 0; e < per_seed[s].size(); ++e) o << s << "," << e << "," << per_seed[s][e] << "\n";
  }
}

}  // namespace

TEST_CASE("run config: defaults, variants and strict keys") {
  RunConfig c = ParseRunConfig(json{{"scenario", {{"name", "hierarchical_comm"}}}});
  CHECK(c.variant == "maddpg");
  CHECK(c.seeds == std::vector<uint64_t>{0});
  CHECK(c.Label() == "maddpg");
  CHECK(c.out == "runs/hierarchical_comm");

  json j = TinyConfig("/tmp/x");
  const RunConfig t = ParseRunConfig(j);
  CHECK(t.train.batch_size == 64);
  CHECK(ParseRunConfig(RunConfigToJson(t)).Label() == t.Label());
  CHECK(RunConfigToJson(ParseRunConfig(RunConfigToJson(t))) == RunConfigToJson(t));

  const env::Scenario s = env::MakeScenario(t.scenario);
  CHECK(ResolveTrainConfig(t, s, 3).mode == replay::CorrectionMode::kOrdered);
  j["variant"] = "maddpg+cc";
  CHECK(ResolveTrainConfig(ParseRunConfig(j), s, 3).mode == replay::CorrectionMode::kOrdered);
  j["variant"] = "maddpg+fp";
  CHECK(ResolveTrainConfig(ParseRunConfig(j), s, 3).fingerprint);
  j["variant"] = "maddpg+xyz";
  CHECK_THROWS(ParseRunConfig(j));
  j["variant"] = "maddpg";
  j["train"]["learning_rate"] = 0.1;
  CHECK_THROWS_WITH(ParseRunConfig(j), doctest::Contains("learning_rate"));
  j = TinyConfig("/tmp/x");
  j["bogus"] = 1;
  CHECK_THROWS_WITH(ParseRunConfig(j), doctest::Contains("bogus"));
  j = TinyConfig("/tmp/x");
  j["seeds"] = json::array();
  CHECK_THROWS(ParseRunConfig(j));
  j = TinyConfig("/tmp/x");
  j["train"]["gamma"] = 1.0;
  CHECK_THROWS(ParseRunConfig(j));
}

TEST_CASE("shipped configs parse") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(COMMCORR_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(LoadRunConfig(e.path().string()));
    ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("run config: per-team variants in the covert scenario") {
  json j{{"scenario", {{"name", "covert_comm"}}},
         {"team_variants", {{"allies", "maddpg+occ"}, {"adversary", "maddpg"}}}};
  const RunConfig c = ParseRunConfig(j);
  CHECK(c.Label() == "adversary=maddpg,allies=maddpg+occ");
  const env::Scenario s = env::MakeScenario(c.scenario);
  const maddpg::TrainConfig t = ResolveTrainConfig(c, s, 0);
  CHECK(t.agent_modes == std::vector<replay::CorrectionMode>{replay::CorrectionMode::kOrdered,
                                                             replay::CorrectionMode::kOrdered,
                                                             replay::CorrectionMode::kNone});
  j["team_variants"] = {{"allies", "maddpg+occ"}};
  CHECK_THROWS(ParseRunConfig(j));
  j["team_variants"] = {{"allies", "maddpg+occ"}, {"eve", "maddpg"}};
  CHECK_THROWS(ParseRunConfig(j));
  j["team_variants"] = {{"allies", "maddpg+fp"}, {"adversary", "maddpg"}};
  CHECK_THROWS(ParseRunConfig(j));
  j["team_variants"] = {{"allies", "maddpg"}, {"adversary", "maddpg"}};
  j["variant"] = "maddpg";
  CHECK_THROWS(ParseRunConfig(j));
}

TEST_CASE("metrics header and row layout") {
  const env::Scenario s = env::MakeCovertComm();
  CHECK(MetricsHeader(s) ==
        "seed,episode,return_speaker,return_listener,return_adversary,team_allies,"
        "team_adversary,critic_loss_speaker,critic_loss_listener,critic_loss_adversary,"
        "policy_loss_speaker,policy_loss_listener,policy_loss_adversary\n");
  maddpg::EpisodeStats st;
  st.episode = 7;
  st.agent_returns = {1, 1, -1};
  st.team_returns = {1, -1};
  st.critic_loss = {0.5, NAN, 0.25};
  st.policy_objective = {2, NAN, -1};
  const std::string row = MetricsRow(9, st);
  CHECK(row.rfind("9,7,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 12);
  CHECK(row.find(",,") != std::string::npos);  // missing loss is an empty cell
}

TEST_CASE("pearson: unit diagonal, symmetry, bounds, masking") {
  nn::RngStream rng(1);
  Matrix x(500, 4);
  for (int r = 0; r < 500; ++r) {
    x(r, 0) = rng.Normal();
    x(r, 1) = 2 * x(r, 0) + 1;
    x(r, 2) = -x(r, 0) + 0.5 * rng.Normal();
    x(r, 3) = 1.0;
  }
  const CorrelationMatrix c = Pearson(x);
  CHECK(c.valid == std::vector<bool>{true, true, true, false});
  for (int a = 0; a < 3; ++a) {
    CHECK(c.corr(a, a) == doctest::Approx(1.0));
    for (int b = 0; b < 3; ++b) {
      CHECK(c.corr(a, b) == doctest::Approx(c.corr(b, a)));
      CHECK(std::abs(c.corr(a, b)) <= 1.0 + 1e-12);
    }
  }
  CHECK(c.corr(0, 1) == doctest::Approx(1.0));
  CHECK(c.corr(0, 2) < -0.8);
  CHECK(!c.Defined(0, 3));
  CHECK(FrobeniusDistance(c, c) == 0.0);
  CHECK(std::isfinite(FrobeniusDistance(c, Pearson(Matrix::Ones(10, 4)))));

  // Reference value from the textbook formula.
  Matrix y(4, 2);
  y << 1, 2, 2, 1, 3, 4, 4, 3;
  CHECK(Pearson(y).corr(0, 1) == doctest::Approx(0.6));

  std::ostringstream csv;
  WriteCorrelationCsv(csv, c, {"a", "b", "c", "d"});
  CHECK(csv.str().find(",,") != std::string::npos);
}

TEST_CASE("plot: smoothing and seed aggregation") {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  CHECK(Smooth(v, 1) == v);
  CHECK(Smooth(v, 2) == std::vector<double>{1, 1.5, 2.5, 3.5, 4.5});
  CHECK_THROWS(Smooth(v, 0));

  SeedSeries one;
  one.by_seed[0] = v;
  const Curve c1 = AggregateCurve(one, 1, "x");
  CHECK(c1.mean == v);
  CHECK(c1.sem == std::vector<double>(5, 0.0));

  SeedSeries many;
  for (int s = 0; s < 20; ++s) many.by_seed[s] = {double(s), double(2 * s), 1.0};
  many.by_seed[99] = {0.0, 0.0};  // shorter series truncates the curve
  const Curve c = AggregateCurve(many, 1, "y");
  REQUIRE(c.mean.size() == 2);
  CHECK(c.seeds == 21);
  // Independent two-pass sample std over seeds 0..19 plus the extra zero.
  std::vector<double> col;
  for (int s = 0; s < 20; ++s) col.push_back(s);
  col.push_back(0);
  double m = 0, ss = 0;
  for (double x : col) m += x / col.size();
  for (double x : col) ss += (x - m) * (x - m);
  CHECK(c.mean[0] == doctest::Approx(m));
  CHECK(c.sem[0] == doctest::Approx(std::sqrt(ss / (col.size() - 1)) / std::sqrt(21.0)));

  const fs::path d = TempDir("plot");
  WriteMetrics(d / "metrics.csv", {{1, 2, 3}, {3, 4, 5}});
  CHECK(ReadMetricsHeader((d / "metrics.csv").string()) ==
        std::vector<std::string>{"seed", "episode", "team_team"});
  const SeedSeries read = ReadMetricsColumn((d / "metrics.csv").string(), "team_team");
  CHECK(read.by_seed.at(1) == std::vector<double>{3, 4, 5});
  CHECK_THROWS_WITH(ReadMetricsColumn((d / "metrics.csv").string(), "team_nope"),
                    doctest::Contains("team_nope"));
  CHECK(RenderCurvesSvg({AggregateCurve(read, 2, "run")}, "t", "team_team").find("<svg") == 0);
}

TEST_CASE("runner: outputs, bitwise reproducibility, loading, evaluation, plotting") {
  const fs::path a = TempDir("run_a"), b = TempDir("run_b");
  const RunResult ra = RunTraining(ParseRunConfig(TinyConfig(a.string())));
  RunTraining(ParseRunConfig(TinyConfig(b.string())));
  for (const char* f : {"metrics.csv", "summary.json", "manifest.json", "timings.csv"}) {
    CHECK(fs::exists(a / f));
  }
  CHECK(Slurp(a / "metrics.csv") == Slurp(b / "metrics.csv"));
  CHECK(Slurp(a / "metrics.csv").size() > 100);

  const json manifest = json::parse(Slurp(a / "manifest.json"));
  CHECK(manifest["status"] == "done");
  CHECK(manifest["code_version"].get<std::string>() == CodeVersion());
  CHECK(manifest["config"]["variant"] == "maddpg+occ");
  for (const auto& f : manifest["files"]) CHECK(fs::exists(a / f.get<std::string>()));

  const RunResult rs = ReadSummary(a.string());
  REQUIRE(rs.seeds.size() == 2);
  CHECK(rs.seeds[0].seed == 3);
  CHECK(rs.seeds[0].episodes == 12);
  CHECK(rs.seeds[0].final_team_mean == ra.seeds[0].final_team_mean);

  CHECK(json::parse(Slurp(a / "summary.json"))["seeds"][0]["checkpoint"] == "checkpoints/seed3.ckpt");
  const LoadedRun run = LoadRun(rs.seeds[1].checkpoint);
  CHECK(run.seed == 4);
  CHECK(run.trainer->episodes_done() == 12);
  const auto e1 = Evaluate(run, 4, {0.0, 1.0});
  const auto e2 = Evaluate(run, 4, {0.0, 1.0});
  REQUIRE(e1.size() == 2);
  CHECK(e1[0].mean == e2[0].mean);
  CHECK(e1[1].drop_p == 1.0);
  CHECK(std::isfinite(e1[1].mean[0]));
  CHECK_THROWS(Evaluate(run, 4, {1.5}));

  const CorrelationReport rep = AnalyzeCorrelation(run, 50, true);
  CHECK(rep.samples == 50);
  CHECK(rep.labels.size() == 3);
  CHECK(rep.distance_to_fresh.count("occ") == 1);

  // Run directories can be moved.
  const fs::path moved = TempDir("run_moved");
  fs::remove_all(moved);
  fs::rename(b, moved);
  CHECK(LoadRun(ReadSummary(moved.string()).seeds[0].checkpoint).seed == 3);
  fs::rename(moved, b);

  const fs::path p = TempDir("plots");
  PlotRuns({a.string(), b.string()}, p.string(), 3, "team_team");
  CHECK(fs::exists(p / "reward_curves.svg"));
  CHECK(Slurp(p / "curves.csv").rfind("run,label,episode,mean,sem,seeds", 0) == 0);
  CHECK_THROWS(LoadRun((a / "missing.ckpt").string()));
}
