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

#ifndef COMMCORR_MADDPG_MADDPG_H_
#define COMMCORR_MADDPG_MADDPG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "commcorr/env/scenario.h"
#include "commcorr/nn/checkpoint.h"
#include "commcorr/nn/mlp.h"
#include "commcorr/nn/optim.h"
#include "commcorr/replay/relabel.h"

namespace commcorr::maddpg {

using nn::Matrix;
using nn::Vector;
using replay::Batch;
using replay::CorrectionMode;

struct TrainConfig {
  double lr = 1e-3;
  double tau = 0.01;
  double gamma = 0.75;
  int batch_size = 1024;
  int update_every = 100;  // environment steps between update rounds
  int64_t buffer_capacity = 10'000'000;
  double gumbel_beta = 1.0;
  // One entry per agent; empty means every agent uses `mode`.
  CorrectionMode mode = CorrectionMode::kNone;
  std::vector<CorrectionMode> agent_modes;
  int K = -1;  // -1: s - 1 for occ, 1 for fcc, 0 otherwise
  bool fingerprint = false;
  int episodes = 10000;
  uint64_t seed = 0;
  double grad_clip = 0.5;  // global norm; <= 0 disables
  std::vector<int> hidden = {64, 64};
  bool relabel_explore = true;
  double policy_reg = 0.0;  // weight on mean squared policy logits

  void Validate() const;
  std::vector<CorrectionMode> ResolvedModes(int num_agents) const;
  int ResolvedK(const comm::CommGraph& graph) const;
};

// iteration / 100000.
double FingerprintValue(int64_t iteration);

struct AgentNets {
  nn::MLPParams policy;
  nn::MLPParams critic;
  nn::MLPParams target_policy;
  nn::MLPParams target_critic;
  nn::AdamState policy_opt;
  nn::AdamState critic_opt;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double policy_objective = 0.0;
};

// Per-agent decentralized policies with centralized critics.
class Maddpg : public replay::PolicySet {
 public:
  Maddpg(const env::Scenario& scenario, const TrainConfig& config, nn::RngStream init_rng);

  int num_agents() const override { return static_cast<int>(nets_.size()); }
  Matrix Act(int agent, const Matrix& obs, bool explore, nn::RngStream& rng) const override;

  // Turns raw network outputs into an action: one-hot per discrete block
  // (Gumbel sample when exploring, else argmax), tanh on the continuous block,
  // no-op on a masked movement block.
  Matrix ActionFromLogits(int agent, const Matrix& logits, bool explore, nn::RngStream& rng) const;
  // Greedy actions of the target policy.
  Matrix ActTarget(int agent, const Matrix& obs) const;

  // y = r_i + gamma * (1 - terminal) * Q'_i(o', a'), a' from target policies.
  Vector CriticTarget(const Batch& batch, int agent) const;
  // Q_i on the batch's (o, a).
  Vector CriticValue(const Batch& batch, int agent) const;

  double UpdateCritic(int agent, const Batch& batch);
  double UpdatePolicy(int agent, const Batch& batch, nn::RngStream& rng);
  void UpdateTargets(int agent);

  const AgentNets& nets(int agent) const { return nets_.at(agent); }
  AgentNets& mutable_nets(int agent) { return nets_.at(agent); }
  const TrainConfig& config() const { return config_; }
  const env::Scenario& scenario() const { return scenario_; }
  int critic_input_dim() const;

  void Write(nn::CheckpointContainer& ckpt) const;
  void Read(const nn::CheckpointContainer& ckpt);

 private:
  Matrix CriticInput(const Matrix& obs, const Matrix& action, const Vector& fingerprint) const;
  Matrix AgentObsCols(const Matrix& joint_obs, int agent) const;

  env::Scenario scenario_;
  TrainConfig config_;
  std::vector<AgentNets> nets_;
};

}  // namespace commcorr::maddpg

#endif  // COMMCORR_MADDPG_MADDPG_H_
