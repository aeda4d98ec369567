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

#ifndef COMMCORR_EXPERIMENT_RUNNER_H_
#define COMMCORR_EXPERIMENT_RUNNER_H_

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "commcorr/experiment/config.h"
#include "commcorr/maddpg/trainer.h"

namespace commcorr::experiment {

// Build identifier recorded in manifests.
std::string CodeVersion();

// metrics.csv columns:
//   seed, episode,
//   return_<agent>          undiscounted episode sum per agent
//   team_<team>             reported team return (see maddpg::TeamReturns)
//   critic_loss_<agent>     mean critic loss of the episode's update rounds
//   policy_loss_<agent>     mean of -Q over the same rounds
// Loss cells are empty for episodes without an update round. Wall-clock time
// goes to timings.csv (seed, episode, seconds) so metrics.csv stays
// reproducible bit for bit.
std::string MetricsHeader(const env::Scenario& scenario);
std::string MetricsRow(uint64_t seed, const maddpg::EpisodeStats& stats);

struct SeedSummary {
  uint64_t seed = 0;
  int episodes = 0;
  // Mean reported team return over the final min(1000, episodes) episodes.
  std::vector<double> final_team_mean;
  double wall_seconds = 0.0;
  std::string checkpoint;
};

struct RunResult {
  std::string dir;
  std::vector<std::string> team_names;
  std::vector<SeedSummary> seeds;
};

// Trains every seed of `config` into config.out: manifest.json (written
// first, finalized at the end), metrics.csv, timings.csv, eval.csv when
// eval_every > 0, checkpoints/seed<S>[_ep<E>].ckpt and summary.json.
RunResult RunTraining(const RunConfig& config, std::ostream* log = nullptr);

// A trained run restored from a checkpoint.
struct LoadedRun {
  RunConfig config;
  uint64_t seed = 0;
  env::Scenario scenario;
  std::unique_ptr<maddpg::Trainer> trainer;
  nn::CheckpointContainer checkpoint;
};
LoadedRun LoadRun(const std::string& checkpoint_path);

// Reads summary.json back.
RunResult ReadSummary(const std::string& dir);

}  // namespace commcorr::experiment

#endif  // COMMCORR_EXPERIMENT_RUNNER_H_
