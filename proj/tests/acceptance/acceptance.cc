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

// Acceptance runner. Prints one PASS/FAIL line per criterion; exit status is
// non-zero if any selected criterion fails. Training runs are cached under
// --cache keyed by a hash of their configuration.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "commcorr/env/channel.h"
#include "commcorr/env/scenario.h"
#include "commcorr/experiment/analysis.h"
#include "commcorr/experiment/config.h"
#include "commcorr/experiment/runner.h"
#include "commcorr/nn/gumbel.h"
#include "commcorr/nn/optim.h"
#include "testing.h"

using namespace commcorr;
using nlohmann::json;
using nn::Matrix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_cache;

// ---- training-run cache ----

experiment::RunResult CachedRun(const std::string& tag, json cfg) {
  cfg["jobs"] = 1;
  cfg.erase("out");
  const experiment::RunConfig parsed = experiment::ParseRunConfig(cfg);
  json canon = experiment::RunConfigToJson(parsed);
  canon.erase("out");
  const std::string key = fmt::format("{:016x}", std::hash<std::string>{}(canon.dump()));
  const fs::path dir = g_cache / (tag + "_" + key);
  if (fs::exists(dir / "manifest.json")) {
    std::ifstream in(dir / "manifest.json");
    if (json::parse(in).value("status", "") == "done") {
      std::cerr << "[cache] " << tag << ": reusing " << dir << "\n";
      return experiment::ReadSummary(dir.string());
    }
  }
  experiment::RunConfig run = parsed;
  run.out = dir.string();
  std::cerr << "[train] " << tag << " -> " << dir << "\n";
  return experiment::RunTraining(run, &std::cerr);
}

json TrainJson(const std::string& scenario_name, int episodes) {
  json s = {{"name", scenario_name}};
  if (scenario_name == "coop_comm") s["n_landmarks"] = 3;
  return json{{"scenario", s},
              {"train", {{"episodes", episodes}}},
              {"early_episodes", 0},
              {"eval_every", 0}};
}

std::vector<uint64_t> Seeds(int n) {
  std::vector<uint64_t> out;
  for (int k = 0; k < n; ++k) out.push_back(k);
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

std::vector<double> FinalTeam(const experiment::RunResult& r, int team) {
  std::vector<double> out;
  for (const auto& s : r.seeds) out.push_back(s.final_team_mean.at(team));
  return out;
}

std::string Join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + fmt::format("{:.3f}", x);
  return out;
}

// ---- 1: relabelling oracle ----

Outcome OracleEquivalence() {
  nn::RngStream rng(1001);
  int failed = 0, rows = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const testing::Setup s = testing::RandomSetup(rng, 2, true);
    rows += static_cast<int>(s.buffer->size());
    failed += testing::OccOracleMismatches(s) > 0;
  }
  return {failed == 0, fmt::format("{}/100 trials mismatched ({} rows checked)", failed, rows)};
}

// ---- 2: invariants ----

Outcome InvariantSuite() {
  nn::RngStream rng(1002);
  int violations = 0, idem = 0, fix = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const env::ChannelModel channel =
        trial % 2 ? env::ChannelModel::Gaussian(0.3) : env::ChannelModel::Identity();
    const testing::Setup s = testing::RandomSetup(rng, 2, true, channel);
    const int n = s.layout.num_agents();
    std::vector<replay::CorrectionMode> modes(n);
    for (auto& m : modes) m = static_cast<replay::CorrectionMode>(rng.UniformInt(3));
    const replay::MinibatchWindow w =
        s.buffer->WindowAt(testing::AllIndices(*s.buffer), 1 + rng.UniformInt(4));
    nn::RngStream r(trial);
    violations += testing::CountInvariantViolations(
        s.layout, replay::OriginalBatch(w),
        replay::AssembleBatches(s.layout, *s.current, channel, w, modes, {}, r));
  }
  for (int trial = 0; trial < 50; ++trial) {
    idem += !testing::OccIdempotent(testing::RandomSetup(rng, 2, true));
    fix += !testing::NoDriftFixpoint(testing::RandomSetup(rng, 2, false));
  }
  int64_t fuzz = 0, records = 0;
  for (int64_t capacity : {1, 7, 64, 500, 5000}) {
    const testing::Setup s = testing::RandomSetup(rng, 1, true);
    fuzz += testing::BufferFuzzMismatches(rng, s.layout, capacity, 12000);
    records += 12000;
  }
  return {violations == 0 && idem == 0 && fix == 0 && fuzz == 0,
          fmt::format("restore/untouched violations {}, idempotence failures {}/50, fixpoint "
                      "failures {}/50, ring fuzz mismatches {} over {} records",
                      violations, idem, fix, fuzz, records)};
}

// ---- 3: numerics ----

Outcome NumericalSuite() {
  nn::RngStream rng(1003);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    std::vector<int> sizes;
    const int layers = 2 + rng.UniformInt(3);
    for (int l = 0; l < layers; ++l) sizes.push_back(1 + rng.UniformInt(10));
    const auto act = k % 2 ? nn::Activation::kRelu : nn::Activation::kTanh;
    worst = std::max(worst, testing::MlpGradientCheck(rng, sizes, 1 + rng.UniformInt(5), act));
  }
  const bool fd_ok = worst < 1e-4;

  // Gumbel: hard rows are one-hot, soft rows on the simplex, same argmax,
  // uniform logits give uniform frequencies.
  const int n = 10000, k = 5;
  const nn::GumbelSample g = nn::GumbelSoftmax(Matrix::Zero(n, k), 1.0, rng);
  bool simplex = true;
  std::vector<int> counts(k, 0);
  for (int r = 0; r < n; ++r) {
    Eigen::Index h = 0, m = 0;
    simplex &= g.hard.row(r).sum() == 1.0 &&
               (g.hard.row(r).array() * (1 - g.hard.row(r).array())).isZero(0.0);
    simplex &= (g.soft.row(r).array() > 0).all() && std::abs(g.soft.row(r).sum() - 1) < 1e-9;
    g.hard.row(r).maxCoeff(&h);
    g.soft.row(r).maxCoeff(&m);
    simplex &= h == m;
    ++counts[h];
  }
  bool uniform = true;
  for (int c : counts) uniform &= testing::WithinBinomial(c, n, 1.0 / k);

  // Soft update: elementwise tau * s + (1 - tau) * t.
  nn::MLPParams src = nn::MLPParams::Init({4, 6, 3}, rng);
  nn::MLPParams tgt = nn::MLPParams::Init({4, 6, 3}, rng);
  const nn::MLPParams t0 = tgt;
  nn::SoftUpdate(tgt, src, 0.01);
  double soft_err = 0;
  for (size_t l = 0; l < tgt.layers.size(); ++l) {
    const Matrix want = 0.01 * src.layers[l].weight + 0.99 * t0.layers[l].weight;
    soft_err = std::max(soft_err, (tgt.layers[l].weight - want).cwiseAbs().maxCoeff());
  }

  // Adam against a scalar reference over 20 steps of random gradients.
  nn::MLPParams p = nn::MLPParams::Init({3, 2}, rng);
  const double w00 = p.layers[0].weight(0, 0);
  nn::AdamState st = nn::AdamState::For(p);
  double ref = w00, m1 = 0, m2 = 0, adam_err = 0;
  for (int t = 1; t <= 20; ++t) {
    nn::MLPParams grad = nn::MLPParams::Init({3, 2}, rng);
    const double gr = grad.layers[0].weight(0, 0);
    nn::AdamStep(p, grad, st);
    m1 = 0.9 * m1 + 0.1 * gr;
    m2 = 0.999 * m2 + 0.001 * gr * gr;
    const double mh = m1 / (1 - std::pow(0.9, t)), vh = m2 / (1 - std::pow(0.999, t));
    ref -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
    adam_err = std::max(adam_err, std::abs(p.layers[0].weight(0, 0) - ref));
  }
  const bool ok = fd_ok && simplex && uniform && soft_err < 1e-15 && adam_err < 1e-12;
  return {ok, fmt::format("worst FD rel err {:.2e} (50 nets), gumbel simplex {}, uniform {} "
                          "({}), soft-update err {:.1e}, adam err {:.1e}",
                          worst, simplex ? "ok" : "BAD", uniform ? "ok" : "BAD",
                          fmt::join(counts, "/"), soft_err, adam_err)};
}

// ---- 4: cooperative communication ----

Outcome CoopReproduction() {
  json base = TrainJson("coop_comm", 10000);
  base["seeds"] = Seeds(5);
  json plain = base, occ = base;
  plain["variant"] = "maddpg";
  occ["variant"] = "maddpg+occ";
  occ["train"]["K"] = 1;
  const auto a = FinalTeam(CachedRun("c4_plain", plain), 0);
  const auto b = FinalTeam(CachedRun("c4_occ", occ), 0);
  int wins = 0;
  for (size_t s = 0; s < a.size(); ++s) wins += b[s] > a[s];
  const double gap = Mean(b) - Mean(a);
  return {wins >= 4 && gap > 0,
          fmt::format("occ(K=1) beats plain in {}/5 seeds, seed-mean gap {:.3f} "
                      "(plain [{}], occ [{}])",
                      wins, gap, Join(a), Join(b))};
}

// ---- 5 and 6: hierarchical ----

json HierarchicalConfig(const std::string& variant, bool early) {
  json c = TrainJson("hierarchical_comm", 10000);
  c["seeds"] = Seeds(3);
  c["variant"] = variant;
  if (early) c["early_episodes"] = 400;  // 10,000 stored steps
  return c;
}

Outcome CorrelationRecovery() {
  const experiment::RunResult r = CachedRun("c56_occ", HierarchicalConfig("maddpg+occ", true));
  int between = 0;
  bool exact = true, below = true;
  std::string detail;
  for (const auto& seed : r.seeds) {
    const experiment::LoadedRun run = experiment::LoadRun(seed.checkpoint);
    const experiment::CorrelationReport rep = experiment::AnalyzeCorrelation(run, 10000, true);
    const double u = rep.distance_to_fresh.at("uncorrected");
    const double f = rep.distance_to_fresh.at("fcc");
    const double o = rep.distance_to_fresh.at("occ");
    int masked = 0;
    for (bool v : rep.c_fresh.valid) masked += !v;
    exact &= o <= 1e-6;
    below &= o < u;
    between += o < f && f < u;
    detail += fmt::format(" seed {}: unc {:.4f} fcc {:.4f} occ {:.2e} ({} masked);", seed.seed,
                          u, f, o, masked);
  }
  return {exact && below && between >= 2,
          fmt::format("occ<=1e-6 {}, occ<unc {}, fcc strictly between in {}/3;{}",
                      exact ? "yes" : "no", below ? "yes" : "no", between, detail)};
}

Outcome HierarchicalOrdering() {
  const auto occ = FinalTeam(CachedRun("c56_occ", HierarchicalConfig("maddpg+occ", true)), 0);
  const auto fcc = FinalTeam(CachedRun("c6_fcc", HierarchicalConfig("maddpg+fcc", false)), 0);
  const auto plain = FinalTeam(CachedRun("c6_plain", HierarchicalConfig("maddpg", false)), 0);
  const double o = Mean(occ), f = Mean(fcc), p = Mean(plain);
  return {o > std::max(f, p),
          fmt::format("seed means occ {:.3f} fcc {:.3f} plain {:.3f} (occ [{}], fcc [{}], "
                      "plain [{}])",
                      o, f, p, Join(occ), Join(fcc), Join(plain))};
}

// ---- 7: covert ----

Outcome CovertAsymmetry() {
  // Covert team returns are already reported as per-step means.
  auto allies_per_step = [](const std::string& tag, const std::string& allies,
                             const std::string& adversary) {
    json c = TrainJson("covert_comm", 10000);
    c["seeds"] = Seeds(5);
    c["team_variants"] = {{"allies", allies}, {"adversary", adversary}};
    return FinalTeam(CachedRun(tag, c), 0);
  };
  const auto cc_allies = allies_per_step("c7_cc_plain", "maddpg+occ", "maddpg");
  const auto plain = allies_per_step("c7_plain_plain", "maddpg", "maddpg");
  const auto cc_adv = allies_per_step("c7_plain_cc", "maddpg", "maddpg+occ");
  const double a = Mean(cc_allies), b = Mean(plain), c = Mean(cc_adv);
  return {a > b && b > c,
          fmt::format("allies per-step reward, need occ-allies > plain > occ-adversary: "
                      "occ-allies {:.4f}, plain {:.4f}, occ-adversary {:.4f} ([{}] / [{}] / [{}])",
                      a, b, c, Join(cc_allies), Join(plain), Join(cc_adv))};
}

// ---- 8: dropout ----

Outcome DropoutStatistics() {
  nn::RngStream rng(1008);
  const env::ChannelModel channel = env::ChannelModel::Dropout(0.25);
  const int n = 10000;
  int dropped = 0;
  for (int k = 0; k < n; ++k) {
    nn::Vector msg = nn::Vector::Zero(5);
    msg(rng.UniformInt(5)) = 1.0;
    dropped += env::Transmit(channel, msg, 5, rng).isZero(0.0);
  }
  const bool freq = testing::WithinBinomial(dropped, n, 0.25);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const testing::Setup s = testing::RandomSetup(rng, 2, true, channel);
    std::vector<replay::CorrectionMode> modes(s.layout.num_agents());
    for (auto& m : modes) m = static_cast<replay::CorrectionMode>(rng.UniformInt(3));
    const replay::MinibatchWindow w =
        s.buffer->WindowAt(testing::AllIndices(*s.buffer), 1 + rng.UniformInt(4));
    violations += testing::CountInvariantViolations(
        s.layout, replay::OriginalBatch(w),
        replay::AssembleBatches(s.layout, *s.current, channel, w, modes, {}, rng));
  }
  return {freq && violations == 0,
          fmt::format("dropped {}/{} (freq {:.4f}, 3-sigma band +-{:.4f}), invariant violations "
                      "under dropout {}",
                      dropped, n, double(dropped) / n, 3 * std::sqrt(0.25 * 0.75 / n),
                      violations)};
}

// ---- 9: determinism ----

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism() {
  const std::vector<json> configs = {
      json{{"scenario", {{"name", "hierarchical_comm"}}},
           {"variant", "maddpg+occ"},
           {"train", {{"episodes", 100}}},
           {"seeds", {11}}},
      json{{"scenario", {{"name", "covert_comm"}, {"drop_p", 0.25}}},
           {"team_variants", {{"allies", "maddpg+fcc"}, {"adversary", "maddpg"}}},
           {"train", {{"episodes", 100}}},
           {"seeds", {12}}}};
  std::string detail;
  bool ok = true;
  for (size_t k = 0; k < configs.size(); ++k) {
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      experiment::RunConfig c = experiment::ParseRunConfig(configs[k]);
      const fs::path dir = g_cache / fmt::format("c9_{}_{}", k, rep);
      fs::remove_all(dir);
      c.out = dir.string();
      experiment::RunTraining(c);
      files[rep] = Slurp(dir / "metrics.csv");
    }
    const bool same = files[0] == files[1] && !files[0].empty();
    ok &= same;
    detail += fmt::format("{}{}: {} bytes {}", k ? "; " : "", configs[k]["scenario"]["name"].get<std::string>(),
                          files[0].size(), same ? "identical" : "DIFFERENT");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string cache = "acceptance_runs";
  app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--cache", cache, "directory for cached training runs");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(cache);
  g_cache = fs::absolute(cache);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"relabelling oracle equivalence", OracleEquivalence},
      {"invariant suite", InvariantSuite},
      {"numerical suite", NumericalSuite},
      {"cooperative communication, occ(K=1) vs maddpg", CoopReproduction},
      {"hierarchical correlation recovery", CorrelationRecovery},
      {"hierarchical ordering effect", HierarchicalOrdering},
      {"covert asymmetry", CovertAsymmetry},
      {"dropped-message statistics", DropoutStatistics},
      {"determinism", Determinism}};
  if (only.empty()) {
    for (int k = 1; k <= 9; ++k) only.push_back(k);
  }
  bool all = true;
  for (int k : only) {
    Outcome o;
    try {
      o = criteria[k - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all &= o.pass;
    std::cout << fmt::format("criterion {} [{}] {}: {}", k, o.pass ? "PASS" : "FAIL",
                             criteria[k - 1].first, o.detail)
              << std::endl;
  }
  return all ? 0 : 1;
}
