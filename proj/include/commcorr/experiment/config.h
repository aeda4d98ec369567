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

#ifndef COMMCORR_EXPERIMENT_CONFIG_H_
#define COMMCORR_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commcorr/env/scenario.h"
#include "commcorr/maddpg/maddpg.h"

namespace commcorr::experiment {

// Run description, loaded from JSON. Unknown keys are rejected everywhere.
//
//   scenario        object  see env::ScenarioOptions
//   variant         string  maddpg | maddpg+fp | maddpg+fcc | maddpg+occ
//                           (maddpg+cc is accepted as maddpg+occ)
//   team_variants   object  team name -> variant, instead of `variant`;
//                           maddpg+fp is not allowed here
//   train           object  lr, tau, gamma, batch_size, update_every,
//                           buffer_capacity, gumbel_beta, K, episodes,
//                           grad_clip, hidden, relabel_explore, policy_reg
//   seeds           [int]   default [0]
//   out             string  output directory (default "runs/<scenario>")
//   checkpoint_every int    episodes between checkpoints, 0 = final only
//   eval_every      int     episodes between greedy evaluations, 0 = never
//   eval_episodes   int     episodes per evaluation (default 100)
//   early_episodes  int     episodes kept as the early-training snapshot
//                           (default 400)
//   save_buffer     bool    put the full replay buffer in final checkpoints
//   jobs            int     seeds trained concurrently (default 1)
struct RunConfig {
  env::ScenarioOptions scenario;
  std::string variant = "maddpg";
  std::map<std::string, std::string> team_variants;
  maddpg::TrainConfig train;
  std::vector<uint64_t> seeds = {0};
  std::string out;
  int checkpoint_every = 0;
  int eval_every = 0;
  int eval_episodes = 100;
  int early_episodes = 400;
  bool save_buffer = false;
  int jobs = 1;

  // Human label: the variant, or "allies=...,adversary=..." per team.
  std::string Label() const;
};

RunConfig ParseRunConfig(const nlohmann::json& j);
nlohmann::json RunConfigToJson(const RunConfig& c);
RunConfig LoadRunConfig(const std::string& path);

// Applies variants to the train config (modes, fingerprint) for a scenario.
maddpg::TrainConfig ResolveTrainConfig(const RunConfig& c, const env::Scenario& scenario,
                                       uint64_t seed);

}  // namespace commcorr::experiment

#endif  // COMMCORR_EXPERIMENT_CONFIG_H_
