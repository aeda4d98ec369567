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

#include "commcorr/experiment/config.h"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "commcorr/util/json_keys.h"

namespace commcorr::experiment {

using util::RejectUnknownKeys;

namespace {

struct VariantSpec {
  replay::CorrectionMode mode = replay::CorrectionMode::kNone;
  bool fingerprint = false;
};

VariantSpec ParseVariant(const std::string& v) {
  if (v == "maddpg") return {};
  if (v == "maddpg+fp") return {replay::CorrectionMode::kNone, true};
  if (v == "maddpg+fcc") return {replay::CorrectionMode::kFirstStep, false};
  if (v == "maddpg+occ" || v == "maddpg+cc") return {replay::CorrectionMode::kOrdered, false};
  throw std::invalid_argument("unknown variant '" + v +
                              "' (maddpg|maddpg+fp|maddpg+fcc|maddpg+occ|maddpg+cc)");
}

}  // namespace

std::string RunConfig::Label() const {
  if (team_variants.empty()) return variant;
  std::string out;
  for (const auto& [team, v] : team_variants) {
    if (!out.empty()) out += ",";
    out += team + "=" + v;
  }
  return out;
}

RunConfig ParseRunConfig(const nlohmann::json& j) {
  RejectUnknownKeys(j,
                    {"scenario", "variant", "team_variants", "train", "seeds", "out",
                     "checkpoint_every", "eval_every", "eval_episodes", "early_episodes",
                     "save_buffer", "jobs"},
                    "config");
  RunConfig c;
  c.scenario = env::ParseScenarioOptions(j.at("scenario"));
  if (j.contains("variant") && j.contains("team_variants")) {
    throw std::invalid_argument("config: give either variant or team_variants, not both");
  }
  c.variant = j.value("variant", "maddpg");
  ParseVariant(c.variant);
  if (j.contains("team_variants")) {
    for (auto it = j["team_variants"].begin(); it != j["team_variants"].end(); ++it) {
      const std::string v = it.value().get<std::string>();
      if (ParseVariant(v).fingerprint) {
        throw std::invalid_argument("config: maddpg+fp cannot be assigned per team");
      }
      c.team_variants[it.key()] = v;
    }
    const env::Scenario s = env::MakeScenario(c.scenario);
    for (const auto& [team, v] : c.team_variants) {
      bool known = false;
      for (const auto& name : s.team_names) known = known || name == team;
      if (!known) throw std::invalid_argument("config: scenario has no team '" + team + "'");
    }
    if (c.team_variants.size() != s.team_names.size()) {
      throw std::invalid_argument("config: team_variants must name every team");
    }
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    RejectUnknownKeys(t,
                      {"lr", "tau", "gamma", "batch_size", "update_every", "buffer_capacity",
                       "gumbel_beta", "K", "episodes", "grad_clip", "hidden", "relabel_explore",
                       "policy_reg"},
                      "config.train");
    maddpg::TrainConfig& tc = c.train;
    tc.lr = t.value("lr", tc.lr);
    tc.tau = t.value("tau", tc.tau);
    tc.gamma = t.value("gamma", tc.gamma);
    tc.batch_size = t.value("batch_size", tc.batch_size);
    tc.update_every = t.value("update_every", tc.update_every);
    tc.buffer_capacity = t.value("buffer_capacity", tc.buffer_capacity);
    tc.gumbel_beta = t.value("gumbel_beta", tc.gumbel_beta);
    tc.K = t.value("K", tc.K);
    tc.episodes = t.value("episodes", tc.episodes);
    tc.grad_clip = t.value("grad_clip", tc.grad_clip);
    if (t.contains("hidden")) tc.hidden = t["hidden"].get<std::vector<int>>();
    tc.relabel_explore = t.value("relabel_explore", tc.relabel_explore);
    tc.policy_reg = t.value("policy_reg", tc.policy_reg);
  }
  c.train.Validate();
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<uint64_t>>();
  if (c.seeds.empty()) throw std::invalid_argument("config: seeds is empty");
  c.out = j.value("out", "runs/" + c.scenario.name);
  c.checkpoint_every = j.value("checkpoint_every", 0);
  c.eval_every = j.value("eval_every", 0);
  c.eval_episodes = j.value("eval_episodes", 100);
  c.early_episodes = j.value("early_episodes", 400);
  c.save_buffer = j.value("save_buffer", false);
  c.jobs = j.value("jobs", 1);
  if (c.checkpoint_every < 0 || c.eval_every < 0 || c.eval_episodes <= 0 ||
      c.early_episodes < 0 || c.jobs <= 0) {
    throw std::invalid_argument("config: cadences must be >= 0, eval_episodes and jobs > 0");
  }
  return c;
}

nlohmann::json RunConfigToJson(const RunConfig& c) {
  nlohmann::json j;
  j["scenario"] = env::ScenarioOptionsToJson(c.scenario);
  if (c.team_variants.empty()) {
    j["variant"] = c.variant;
  } else {
    j["team_variants"] = c.team_variants;
  }
  const maddpg::TrainConfig& t = c.train;
  j["train"] = {{"lr", t.lr},
                {"tau", t.tau},
                {"gamma", t.gamma},
                {"batch_size", t.batch_size},
                {"update_every", t.update_every},
                {"buffer_capacity", t.buffer_capacity},
                {"gumbel_beta", t.gumbel_beta},
                {"K", t.K},
                {"episodes", t.episodes},
                {"grad_clip", t.grad_clip},
                {"hidden", t.hidden},
                {"relabel_explore", t.relabel_explore},
                {"policy_reg", t.policy_reg}};
  j["seeds"] = c.seeds;
  j["out"] = c.out;
  j["checkpoint_every"] = c.checkpoint_every;
  j["eval_every"] = c.eval_every;
  j["eval_episodes"] = c.eval_episodes;
  j["early_episodes"] = c.early_episodes;
  j["save_buffer"] = c.save_buffer;
  j["jobs"] = c.jobs;
  return j;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("{}: {}", path, e.what()));
  }
  return ParseRunConfig(j);
}

maddpg::TrainConfig ResolveTrainConfig(const RunConfig& c, const env::Scenario& scenario,
                                       uint64_t seed) {
  maddpg::TrainConfig t = c.train;
  t.seed = seed;
  if (c.team_variants.empty()) {
    const VariantSpec v = ParseVariant(c.variant);
    t.mode = v.mode;
    t.fingerprint = v.fingerprint;
    t.agent_modes.clear();
  } else {
    t.agent_modes.clear();
    for (const env::AgentSpec& a : scenario.agents) {
      const std::string& team = scenario.team_names.at(a.team);
      t.agent_modes.push_back(ParseVariant(c.team_variants.at(team)).mode);
    }
  }
  return t;
}

}  // namespace commcorr::experiment
