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

#include "commcorr/maddpg/trainer.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::maddpg {

std::vector<double> TeamReturns(const env::Scenario& scenario,
                                const std::vector<std::vector<double>>& step_rewards) {
  std::vector<double> out;
  const double steps = static_cast<double>(step_rewards.size());
  for (int k = 0; k < scenario.num_teams(); ++k) {
    int rep = -1;
    for (int i = 0; i < scenario.num_agents() && rep < 0; ++i) {
      if (scenario.agents[i].team == k) rep = i;
    }
    double sum = 0.0;
    for (const auto& r : step_rewards) sum += r.at(rep);
    switch (scenario.kind) {
      case env::ScenarioKind::kCovertComm:
        out.push_back(steps > 0 ? sum / steps : 0.0);
        break;
      case env::ScenarioKind::kMultiTargetComm:
        out.push_back(sum / scenario.num_agents());
        break;
      default:
        out.push_back(sum);
        break;
    }
  }
  return out;
}

RolloutResult Rollout(const env::Scenario& scenario, const replay::PolicySet& policies,
                      bool explore, nn::RngStream& reset_rng, nn::RngStream& channel_rng,
                      nn::RngStream& act_rng, env::TrajectoryWriter* trajectory, int episode_id) {
  const comm::CommLayout& layout = scenario.layout;
  const int n = scenario.num_agents();
  env::ResetResult reset = env::Reset(scenario, reset_rng);
  env::WorldState& state = reset.state;
  env::JointObs obs = std::move(reset.obs);

  RolloutResult out;
  out.agent_returns.assign(n, 0.0);
  out.joint_actions.resize(scenario.episode_length, layout.joint_action_dim());
  out.joint_obs.resize(scenario.episode_length, layout.joint_obs_dim());
  std::vector<std::vector<double>> rewards;
  for (int t = 0; t < scenario.episode_length; ++t) {
    env::JointAction actions(n);
    for (int i = 0; i < n; ++i) {
      out.joint_obs.row(t).segment(layout.obs_offset(i), obs[i].size()) = obs[i].transpose();
      actions[i] = policies.Act(i, obs[i].transpose(), explore, act_rng).row(0).transpose();
      out.joint_actions.row(t).segment(layout.action_offset(i), actions[i].size()) =
          actions[i].transpose();
    }
    env::StepResult step = env::Step(scenario, state, actions, channel_rng);
    if (trajectory) trajectory->Write(scenario, episode_id, t, state, actions, step.rewards);
    for (int i = 0; i < n; ++i) out.agent_returns[i] += step.rewards[i];
    rewards.push_back(step.rewards);
    obs = std::move(step.obs);
  }
  out.team_returns = TeamReturns(scenario, rewards);
  return out;
}

Trainer::Trainer(const env::Scenario& scenario, const TrainConfig& config)
    : scenario_(scenario),
      config_(config),
      K_(config.ResolvedK(scenario.graph())),
      modes_(config.ResolvedModes(scenario.num_agents())),
      root_(config.seed),
      act_rng_(root_.Fork("act")),
      channel_rng_(root_.Fork("channel")),
      sample_rng_(root_.Fork("sample")),
      relabel_rng_(root_.Fork("relabel")),
      update_rng_(root_.Fork("update")),
      maddpg_(scenario, config, root_.Fork("init")),
      buffer_(scenario.layout, config.buffer_capacity) {
  for (CorrectionMode m : modes_) {
    if (m == CorrectionMode::kFirstStep && K_ < 1) {
      throw std::invalid_argument("train config: fcc needs K >= 1");
    }
  }
}

nn::RngStream Trainer::ResetStream(int64_t episode) const {
  return root_.Fork("reset", static_cast<uint64_t>(episode));
}

std::vector<UpdateStats> Trainer::UpdateRound() {
  const replay::MinibatchWindow window =
      buffer_.SampleWindow(sample_rng_, config_.batch_size, K_);
  replay::RelabelOptions options;
  options.explore = config_.relabel_explore;
  const std::vector<Batch> batches = replay::AssembleBatches(
      scenario_.layout, maddpg_, scenario_.channel, window, modes_, options, relabel_rng_);
  std::vector<UpdateStats> stats(scenario_.num_agents());
  for (int i = 0; i < scenario_.num_agents(); ++i) {
    stats[i].critic_loss = maddpg_.UpdateCritic(i, batches[i]);
    stats[i].policy_objective = maddpg_.UpdatePolicy(i, batches[i], update_rng_);
    maddpg_.UpdateTargets(i);
  }
  return stats;
}

EpisodeStats Trainer::RunEpisode() {
  const comm::CommLayout& layout = scenario_.layout;
  const int n = scenario_.num_agents();
  nn::RngStream reset_rng = ResetStream(episode_);
  env::ResetResult reset = env::Reset(scenario_, reset_rng);
  env::WorldState& state = reset.state;
  env::JointObs obs = std::move(reset.obs);

  EpisodeStats stats;
  stats.episode = episode_;
  stats.agent_returns.assign(n, 0.0);
  stats.critic_loss.assign(n, 0.0);
  stats.policy_objective.assign(n, 0.0);
  std::vector<std::vector<double>> rewards;

  replay::ExperienceRecord rec;
  rec.episode = episode_;
  rec.obs.resize(layout.joint_obs_dim());
  rec.next_obs.resize(layout.joint_obs_dim());
  rec.action.resize(layout.joint_action_dim());
  for (int t = 0; t < scenario_.episode_length; ++t) {
    env::JointAction actions(n);
    for (int i = 0; i < n; ++i) {
      rec.obs.segment(layout.obs_offset(i), obs[i].size()) = obs[i];
      actions[i] = maddpg_.Act(i, obs[i].transpose(), true, act_rng_).row(0).transpose();
      rec.action.segment(layout.action_offset(i), actions[i].size()) = actions[i];
    }
    env::StepResult step = env::Step(scenario_, state, actions, channel_rng_);
    for (int i = 0; i < n; ++i) {
      rec.next_obs.segment(layout.obs_offset(i), step.obs[i].size()) = step.obs[i];
      stats.agent_returns[i] += step.rewards[i];
    }
    rec.step = t;
    rec.rewards = step.rewards;
    rec.terminal = step.done;
    rec.fingerprint = config_.fingerprint ? FingerprintValue(env_steps_) : 0.0;
    buffer_.Push(rec);
    ++env_steps_;
    rewards.push_back(step.rewards);
    obs = std::move(step.obs);

    if (buffer_.size() >= config_.batch_size && env_steps_ % config_.update_every == 0) {
      const std::vector<UpdateStats> u = UpdateRound();
      for (int i = 0; i < n; ++i) {
        stats.critic_loss[i] += u[i].critic_loss;
        stats.policy_objective[i] += u[i].policy_objective;
      }
      ++stats.updates;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (stats.updates > 0) {
      stats.critic_loss[i] /= stats.updates;
      stats.policy_objective[i] /= stats.updates;
    } else {
      stats.critic_loss[i] = std::numeric_limits<double>::quiet_NaN();
      stats.policy_objective[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  stats.team_returns = TeamReturns(scenario_, rewards);
  ++episode_;
  return stats;
}

void Trainer::Write(nn::CheckpointContainer& ckpt, bool include_buffer) const {
  nn::ByteWriter w;
  w.I64(episode_);
  w.I64(env_steps_);
  w.I64(K_);
  for (const nn::RngStream* r :
       {&act_rng_, &channel_rng_, &sample_rng_, &relabel_rng_, &update_rng_}) {
    w.Str(r->SaveState());
  }
  ckpt.Put("trainer", w.Take());
  maddpg_.Write(ckpt);
  if (include_buffer) {
    nn::ByteWriter b;
    buffer_.Write(b);
    ckpt.Put("buffer", b.Take());
  }
}

void Trainer::Read(const nn::CheckpointContainer& ckpt) {
  nn::ByteReader r(ckpt.Get("trainer"));
  episode_ = r.I64();
  env_steps_ = r.I64();
  if (r.I64() != K_) throw std::runtime_error("checkpoint: correction depth differs from config");
  for (nn::RngStream* s : {&act_rng_, &channel_rng_, &sample_rng_, &relabel_rng_, &update_rng_}) {
    s->LoadState(r.Str());
  }
  maddpg_.Read(ckpt);
  if (ckpt.Has("buffer")) {
    nn::ByteReader b(ckpt.Get("buffer"));
    buffer_ = replay::ReplayBuffer::Read(scenario_.layout, b);
  }
}

}  // namespace commcorr::maddpg
