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

#ifndef COMMCORR_MADDPG_TRAINER_H_
#define COMMCORR_MADDPG_TRAINER_H_

#include <cstdint>
#include <vector>

#include "commcorr/env/world.h"
#include "commcorr/maddpg/maddpg.h"
#include "commcorr/replay/buffer.h"

namespace commcorr::maddpg {

// Team return as plotted: per-episode sum for the distance tasks (divided by
// the number of agents for multi_target_comm), per-step mean for covert_comm.
// `step_rewards[t][i]`.
std::vector<double> TeamReturns(const env::Scenario& scenario,
                                const std::vector<std::vector<double>>& step_rewards);

struct RolloutResult {
  std::vector<double> agent_returns;  // plain sums over the episode
  std::vector<double> team_returns;
  Matrix joint_actions;  // episode_length x joint_action_dim
  Matrix joint_obs;      // episode_length x joint_obs_dim, o_t
};

// One episode with `policies`. Reset draws from `reset_rng`, channel noise
// from `channel_rng`, exploration from `act_rng`.
RolloutResult Rollout(const env::Scenario& scenario, const replay::PolicySet& policies,
                      bool explore, nn::RngStream& reset_rng, nn::RngStream& channel_rng,
                      nn::RngStream& act_rng, env::TrajectoryWriter* trajectory = nullptr,
                      int episode_id = 0);

struct EpisodeStats {
  int64_t episode = 0;
  std::vector<double> agent_returns;
  std::vector<double> team_returns;
  // Means over the update rounds that ran during the episode; NaN if none.
  std::vector<double> critic_loss;
  std::vector<double> policy_objective;
  int updates = 0;
};

// Algorithm loop: act with exploration, store, and every `update_every`
// stored steps run one update round over all agents.
class Trainer {
 public:
  Trainer(const env::Scenario& scenario, const TrainConfig& config);

  EpisodeStats RunEpisode();
  // Samples one window, relabels per agent mode, updates every agent.
  std::vector<UpdateStats> UpdateRound();

  // Reset stream of a given episode; identical across correction modes.
  nn::RngStream ResetStream(int64_t episode) const;

  Maddpg& maddpg() { return maddpg_; }
  const Maddpg& maddpg() const { return maddpg_; }
  const replay::ReplayBuffer& buffer() const { return buffer_; }
  const env::Scenario& scenario() const { return scenario_; }
  const TrainConfig& config() const { return config_; }
  int K() const { return K_; }
  const std::vector<CorrectionMode>& modes() const { return modes_; }
  int64_t episodes_done() const { return episode_; }
  int64_t env_steps() const { return env_steps_; }

  // Networks, optimizer moments, counters and RNG states; the replay buffer
  // only when asked.
  void Write(nn::CheckpointContainer& ckpt, bool include_buffer) const;
  void Read(const nn::CheckpointContainer& ckpt);

 private:
  env::Scenario scenario_;
  TrainConfig config_;
  int K_;
  std::vector<CorrectionMode> modes_;
  nn::RngStream root_;
  nn::RngStream act_rng_;
  nn::RngStream channel_rng_;
  nn::RngStream sample_rng_;
  nn::RngStream relabel_rng_;
  nn::RngStream update_rng_;
  Maddpg maddpg_;
  replay::ReplayBuffer buffer_;
  int64_t episode_ = 0;
  int64_t env_steps_ = 0;
};

}  // namespace commcorr::maddpg

#endif  // COMMCORR_MADDPG_TRAINER_H_
