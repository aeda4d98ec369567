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

#include "commcorr/maddpg/maddpg.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "commcorr/nn/gumbel.h"

namespace commcorr::maddpg {

using nn::Tape;
using nn::Var;

void TrainConfig::Validate() const {
  auto positive = [](const char* what, double v) {
    if (!(v > 0)) throw std::invalid_argument(fmt::format("train config: {} must be > 0", what));
  };
  positive("lr", lr);
  positive("batch_size", batch_size);
  positive("update_every", update_every);
  positive("buffer_capacity", static_cast<double>(buffer_capacity));
  positive("gumbel_beta", gumbel_beta);
  positive("episodes", episodes);
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("train config: tau outside [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("train config: gamma outside [0, 1)");
  }
  if (K < -1) throw std::invalid_argument("train config: K must be >= 0 (or -1 for auto)");
  if (policy_reg < 0) throw std::invalid_argument("train config: policy_reg is negative");
  for (int h : hidden) positive("hidden layer size", h);
}

std::vector<CorrectionMode> TrainConfig::ResolvedModes(int num_agents) const {
  if (agent_modes.empty()) return std::vector<CorrectionMode>(num_agents, mode);
  if (static_cast<int>(agent_modes.size()) != num_agents) {
    throw std::invalid_argument(fmt::format("train config: {} agent modes for {} agents",
                                            agent_modes.size(), num_agents));
  }
  return agent_modes;
}

int TrainConfig::ResolvedK(const comm::CommGraph& graph) const {
  if (K >= 0) return K;
  const auto modes = ResolvedModes(graph.num_agents());
  int k = 0;
  for (CorrectionMode m : modes) {
    if (m == CorrectionMode::kOrdered) k = std::max(k, graph.correction_depth());
    if (m == CorrectionMode::kFirstStep) k = std::max(k, 1);
  }
  return k;
}

double FingerprintValue(int64_t iteration) {
  if (iteration < 0) throw std::invalid_argument("fingerprint: negative iteration");
  return static_cast<double>(iteration) / 100000.0;
}

Maddpg::Maddpg(const env::Scenario& scenario, const TrainConfig& config,
               nn::RngStream init_rng)
    : scenario_(scenario), config_(config) {
  config_.Validate();
  const comm::CommLayout& layout = scenario_.layout;
  const int n = layout.num_agents();
  nn::AdamConfig adam;
  adam.lr = config_.lr;
  for (int i = 0; i < n; ++i) {
    AgentNets a;
    nn::RngStream rng = init_rng.Fork("agent", i);
    a.policy = nn::MLPParams::Init(
        nn::MakeLayerSizes(layout.obs(i).total_dim(), layout.action(i).total_dim(), config_.hidden),
        rng);
    a.critic = nn::MLPParams::Init(nn::MakeLayerSizes(critic_input_dim(), 1, config_.hidden), rng);
    a.target_policy = a.policy;
    a.target_critic = a.critic;
    a.policy_opt = nn::AdamState::For(a.policy, adam);
    a.critic_opt = nn::AdamState::For(a.critic, adam);
    nets_.push_back(std::move(a));
  }
}

int Maddpg::critic_input_dim() const {
  return scenario_.layout.joint_obs_dim() + scenario_.layout.joint_action_dim() +
         (config_.fingerprint ? 1 : 0);
}

Matrix Maddpg::AgentObsCols(const Matrix& joint_obs, int agent) const {
  const comm::CommLayout& layout = scenario_.layout;
  return joint_obs.middleCols(layout.obs_offset(agent), layout.obs(agent).total_dim());
}

Matrix Maddpg::CriticInput(const Matrix& obs, const Matrix& action,
                           const Vector& fingerprint) const {
  Matrix in(obs.rows(), critic_input_dim());
  in.leftCols(obs.cols()) = obs;
  in.middleCols(obs.cols(), action.cols()) = action;
  if (config_.fingerprint) in.rightCols(1) = fingerprint;
  return in;
}

Matrix Maddpg::ActionFromLogits(int agent, const Matrix& logits, bool explore,
                                nn::RngStream& rng) const {
  const comm::ActionLayout& al = scenario_.layout.action(agent);
  Matrix out = Matrix::Zero(logits.rows(), al.total_dim());
  auto discrete = [&](int offset, int dim) {
    const Matrix block = logits.middleCols(offset, dim);
    out.middleCols(offset, dim) =
        explore ? nn::GumbelSoftmax(block, config_.gumbel_beta, rng).hard : nn::OneHotArgmax(block);
  };
  if (al.movement_dim > 0) {
    if (al.movement_masked) {
      out.col(0).setOnes();
    } else {
      discrete(0, al.movement_dim);
    }
  }
  for (const comm::MessageBlock& b : al.messages) discrete(b.offset, b.dim);
  if (al.continuous_dim > 0) {
    out.middleCols(al.continuous_offset, al.continuous_dim) =
        logits.middleCols(al.continuous_offset, al.continuous_dim).array().tanh().matrix();
  }
  return out;
}

Matrix Maddpg::Act(int agent, const Matrix& obs, bool explore, nn::RngStream& rng) const {
  const int want = scenario_.layout.obs(agent).total_dim();
  if (obs.cols() != want) {
    throw std::invalid_argument(fmt::format("act: agent {} observation has {} entries, expected {}",
                                            agent, obs.cols(), want));
  }
  return ActionFromLogits(agent, nn::Forward(nets_.at(agent).policy, obs), explore, rng);
}

Matrix Maddpg::ActTarget(int agent, const Matrix& obs) const {
  nn::RngStream unused(0);
  return ActionFromLogits(agent, nn::Forward(nets_.at(agent).target_policy, obs), false, unused);
}

Vector Maddpg::CriticTarget(const Batch& batch, int agent) const {
  const comm::CommLayout& layout = scenario_.layout;
  Matrix next_action(batch.batch_size(), layout.joint_action_dim());
  for (int j = 0; j < num_agents(); ++j) {
    next_action.middleCols(layout.action_offset(j), layout.action(j).total_dim()) =
        ActTarget(j, AgentObsCols(batch.next_obs, j));
  }
  const Matrix q_next = nn::Forward(nets_.at(agent).target_critic,
                                    CriticInput(batch.next_obs, next_action, batch.fingerprint));
  const Vector not_done = (1.0 - batch.terminal.array()).matrix();
  return batch.rewards.col(agent) +
         config_.gamma * not_done.cwiseProduct(q_next.col(0));
}

Vector Maddpg::CriticValue(const Batch& batch, int agent) const {
  return nn::Forward(nets_.at(agent).critic,
                     CriticInput(batch.obs, batch.action, batch.fingerprint))
      .col(0);
}

double Maddpg::UpdateCritic(int agent, const Batch& batch) {
  AgentNets& a = nets_.at(agent);
  const Vector y = CriticTarget(batch, agent);
  Tape tape;
  nn::MLPParams grads = a.critic.ZerosLike();
  Var q = nn::Forward(tape, a.critic, &grads,
                      tape.Constant(CriticInput(batch.obs, batch.action, batch.fingerprint)));
  Var loss = nn::Mean(nn::Square(nn::Sub(q, tape.Constant(y))));
  const double value = loss.value()(0, 0);
  if (!std::isfinite(value)) {
    throw std::runtime_error(fmt::format(
        "update_critic: agent {} loss is {} (target range [{}, {}], Adam step {})", agent, value,
        y.minCoeff(), y.maxCoeff(), a.critic_opt.step));
  }
  tape.Backward(loss);
  if (config_.grad_clip > 0) nn::ClipGlobalNorm(grads, config_.grad_clip);
  nn::AdamStep(a.critic, grads, a.critic_opt);
  return value;
}

double Maddpg::UpdatePolicy(int agent, const Batch& batch, nn::RngStream& rng) {
  const comm::CommLayout& layout = scenario_.layout;
  AgentNets& a = nets_.at(agent);
  Tape tape;
  nn::MLPParams grads = a.policy.ZerosLike();

  std::vector<Var> parts;
  parts.push_back(tape.Constant(batch.obs));
  Var logits_i;
  for (int j = 0; j < num_agents(); ++j) {
    const Matrix obs_j = AgentObsCols(batch.obs, j);
    if (j != agent) {
      parts.push_back(tape.Constant(Act(j, obs_j, true, rng)));
      continue;
    }
    const comm::ActionLayout& al = layout.action(j);
    logits_i = nn::Forward(tape, a.policy, &grads, tape.Constant(obs_j));
    if (al.movement_dim > 0) {
      if (al.movement_masked) {
        Matrix noop = Matrix::Zero(batch.batch_size(), al.movement_dim);
        noop.col(0).setOnes();
        parts.push_back(tape.Constant(noop));
      } else {
        parts.push_back(nn::GumbelSoftmaxST(nn::SliceCols(logits_i, 0, al.movement_dim),
                                            config_.gumbel_beta, rng));
      }
    }
    for (const comm::MessageBlock& b : al.messages) {
      parts.push_back(
          nn::GumbelSoftmaxST(nn::SliceCols(logits_i, b.offset, b.dim), config_.gumbel_beta, rng));
    }
    if (al.continuous_dim > 0) {
      parts.push_back(nn::Tanh(nn::SliceCols(logits_i, al.continuous_offset, al.continuous_dim)));
    }
  }
  if (config_.fingerprint) parts.push_back(tape.Constant(Matrix(batch.fingerprint)));
  Var q = nn::Forward(tape, a.critic, nullptr, nn::ConcatCols(parts));
  Var objective = nn::Mean(q);
  Var loss = nn::Scale(objective, -1.0);
  if (config_.policy_reg > 0) {
    loss = nn::Add(loss, nn::Scale(nn::Mean(nn::Square(logits_i)), config_.policy_reg));
  }
  const double value = objective.value()(0, 0);
  if (!std::isfinite(value)) {
    throw std::runtime_error(fmt::format("update_policy: agent {} objective is {} (Adam step {})",
                                         agent, value, a.policy_opt.step));
  }
  tape.Backward(loss);
  if (config_.grad_clip > 0) nn::ClipGlobalNorm(grads, config_.grad_clip);
  nn::AdamStep(a.policy, grads, a.policy_opt);
  return value;
}

void Maddpg::UpdateTargets(int agent) {
  AgentNets& a = nets_.at(agent);
  nn::SoftUpdate(a.target_policy, a.policy, config_.tau);
  nn::SoftUpdate(a.target_critic, a.critic, config_.tau);
}

void Maddpg::Write(nn::CheckpointContainer& ckpt) const {
  for (int i = 0; i < num_agents(); ++i) {
    const AgentNets& a = nets_[i];
    nn::ByteWriter w;
    nn::WriteMLP(w, a.policy);
    nn::WriteMLP(w, a.critic);
    nn::WriteMLP(w, a.target_policy);
    nn::WriteMLP(w, a.target_critic);
    nn::WriteAdam(w, a.policy_opt);
    nn::WriteAdam(w, a.critic_opt);
    ckpt.Put(fmt::format("agent{}", i), w.Take());
  }
}

void Maddpg::Read(const nn::CheckpointContainer& ckpt) {
  for (int i = 0; i < num_agents(); ++i) {
    nn::ByteReader r(ckpt.Get(fmt::format("agent{}", i)));
    AgentNets a;
    a.policy = nn::ReadMLP(r);
    a.critic = nn::ReadMLP(r);
    a.target_policy = nn::ReadMLP(r);
    a.target_critic = nn::ReadMLP(r);
    a.policy_opt = nn::ReadAdam(r);
    a.critic_opt = nn::ReadAdam(r);
    if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes in agent section");
    const AgentNets& cur = nets_[i];
    if (!a.policy.SameArchitecture(cur.policy) || !a.critic.SameArchitecture(cur.critic) ||
        !a.target_policy.SameArchitecture(cur.policy) ||
        !a.target_critic.SameArchitecture(cur.critic)) {
      throw std::runtime_error(fmt::format(
          "checkpoint: agent {} networks do not match the scenario/config architecture", i));
    }
    nets_[i] = std::move(a);
  }
}

}  // namespace commcorr::maddpg
