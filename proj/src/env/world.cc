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

#include "commcorr/env/world.h"

#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::env {

namespace {

Vec2 UniformPoint(nn::RngStream& rng) {
  const double x = rng.Uniform(-1.0, 1.0);
  const double y = rng.Uniform(-1.0, 1.0);
  return {x, y};
}

Vector OneHot(int index, int dim) {
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

const Vec2 kDirections[comm::kMovementDim] = {
    {0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};

// Velocity followed by landmark positions relative to the agent, in colour
// order.
void AppendNavigation(const WorldState& s, int agent, std::vector<double>& out) {
  out.push_back(s.agent_vel[agent].x());
  out.push_back(s.agent_vel[agent].y());
  for (const Vec2& lm : s.landmark_pos) {
    const Vec2 rel = lm - s.agent_pos[agent];
    out.push_back(rel.x());
    out.push_back(rel.y());
  }
}

void AppendOneHot(int index, int dim, std::vector<double>& out) {
  for (int k = 0; k < dim; ++k) out.push_back(k == index ? 1.0 : 0.0);
}

int Argmax(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

ResetResult Reset(const Scenario& scenario, nn::RngStream& rng) {
  const int n = scenario.num_agents();
  WorldState s;
  s.agent_pos.resize(n);
  s.agent_vel.assign(n, Vec2::Zero());
  for (int i = 0; i < n; ++i) s.agent_pos[i] = UniformPoint(rng);
  s.landmark_pos.resize(scenario.num_landmarks);
  for (auto& lm : s.landmark_pos) lm = UniformPoint(rng);
  s.target.assign(n, -1);
  s.known_color.assign(n, -1);

  switch (scenario.kind) {
    case ScenarioKind::kCoopComm: {
      const int target = rng.UniformInt(scenario.num_landmarks);
      s.target = {target, target};
      break;
    }
    case ScenarioKind::kHierarchicalComm: {
      const int target = rng.UniformInt(scenario.num_landmarks);
      std::vector<int> others;
      for (int c = 0; c < scenario.num_landmarks; ++c) {
        if (c != target) others.push_back(c);
      }
      // Fisher-Yates over the three non-target colours.
      for (int k = static_cast<int>(others.size()) - 1; k > 0; --k) {
        std::swap(others[k], others[rng.UniformInt(k + 1)]);
      }
      s.target.assign(n, target);
      for (int k = 0; k < 3; ++k) s.known_color[k] = others[k];
      break;
    }
    case ScenarioKind::kCovertComm:
      s.covert_message = rng.UniformInt(scenario.msg_dim);
      s.covert_key = rng.UniformInt(scenario.key_dim);
      break;
    case ScenarioKind::kMultiTargetComm:
      for (int i = 0; i < n; ++i) s.target[i] = rng.UniformInt(scenario.num_landmarks);
      break;
  }

  const comm::CommGraph& g = scenario.graph();
  s.pending_messages.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) s.pending_messages[e] = Vector::Zero(g.edge(e).dim);
  s.decode_outputs.resize(n);
  for (int i = 0; i < n; ++i) {
    s.decode_outputs[i] = Vector::Zero(scenario.layout.action(i).continuous_dim);
  }
  s.step = 0;
  JointObs obs = Observe(scenario, s);
  return {std::move(s), std::move(obs)};
}

WorldState PhysicsStep(const Scenario& scenario, WorldState state,
                       const std::vector<int>& movement) {
  const int n = scenario.num_agents();
  if (static_cast<int>(movement.size()) != n) {
    throw std::invalid_argument(fmt::format(
        "physics_step: {} movement actions for {} agents", movement.size(), n));
  }
  const PhysicsConfig& cfg = scenario.physics;
  for (int i = 0; i < n; ++i) {
    const int m = movement[i];
    if (m < 0 || m >= comm::kMovementDim) {
      throw std::invalid_argument(fmt::format("physics_step: agent {} movement {} invalid", i, m));
    }
    if (!scenario.agents[i].mobile) {
      if (m != 0) {
        throw std::invalid_argument(fmt::format(
            "physics_step: agent {} ({}) is immobile but was given movement {}", i,
            scenario.agents[i].name, m));
      }
      continue;
    }
    Vec2& v = state.agent_vel[i];
    v = cfg.damping * v + cfg.force_scale * cfg.dt * kDirections[m];
    if (cfg.max_speed) {
      const double speed = v.norm();
      if (speed > *cfg.max_speed) v *= *cfg.max_speed / speed;
    }
    state.agent_pos[i] += v * cfg.dt;
  }
  state.step += 1;
  return state;
}

JointObs Observe(const Scenario& scenario, const WorldState& s) {
  const int n = scenario.num_agents();
  JointObs obs(n);
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    buf.clear();
    switch (scenario.kind) {
      case ScenarioKind::kCoopComm:
        if (i == 0) {
          AppendOneHot(s.target[0], scenario.num_landmarks, buf);
        } else {
          AppendNavigation(s, i, buf);
        }
        break;
      case ScenarioKind::kHierarchicalComm:
        if (i < 3) {
          AppendOneHot(s.known_color[i], scenario.num_landmarks, buf);
        } else {
          AppendNavigation(s, i, buf);
        }
        break;
      case ScenarioKind::kCovertComm:
        if (i == 0) AppendOneHot(s.covert_message, scenario.msg_dim, buf);
        if (i <= 1 && scenario.key_visible) {
          AppendOneHot(s.covert_key, scenario.key_dim, buf);
        }
        break;
      case ScenarioKind::kMultiTargetComm:
        AppendNavigation(s, i, buf);
        if (i == 0) {
          for (int k = 0; k < n; ++k) AppendOneHot(s.target[k], scenario.num_landmarks, buf);
        }
        break;
    }
    const comm::ObservationLayout& layout = scenario.layout.obs(i);
    if (static_cast<int>(buf.size()) != layout.env_dim) {
      throw std::logic_error(fmt::format(
          "observe: agent {} environment block has {} entries, layout says {}", i,
          buf.size(), layout.env_dim));
    }
    for (const comm::CommSlot& slot : layout.slots) {
      const Vector& m = s.pending_messages[slot.edge];
      buf.insert(buf.end(), m.data(), m.data() + m.size());
    }
    obs[i] = Eigen::Map<const Vector>(buf.data(), static_cast<Eigen::Index>(buf.size()));
  }
  return obs;
}

std::vector<double> Reward(const Scenario& scenario, const WorldState& s) {
  const int n = scenario.num_agents();
  std::vector<double> r(n, 0.0);
  switch (scenario.kind) {
    case ScenarioKind::kCoopComm:
    case ScenarioKind::kHierarchicalComm: {
      const int listener = n - 1;
      const double d =
          (s.agent_pos[listener] - s.landmark_pos[s.target[listener]]).norm();
      r.assign(n, -d);
      break;
    }
    case ScenarioKind::kMultiTargetComm: {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        total += (s.agent_pos[i] - s.landmark_pos[s.target[i]]).norm();
      }
      r.assign(n, -total);
      break;
    }
    case ScenarioKind::kCovertComm: {
      const Vector truth = OneHot(s.covert_message, scenario.msg_dim);
      const double listener_err = (s.decode_outputs[1] - truth).squaredNorm();
      const double adversary_err = (s.decode_outputs[2] - truth).squaredNorm();
      const double allies = 0.5 * (adversary_err - listener_err);
      r = {allies, allies, -allies};
      break;
    }
  }
  return r;
}

int MovementIndex(const Scenario& scenario, int agent, const Vector& action) {
  const comm::ActionLayout& layout = scenario.layout.action(agent);
  if (layout.movement_dim == 0 || layout.movement_masked) return 0;
  return Argmax(action.head(layout.movement_dim));
}

StepResult Step(const Scenario& scenario, WorldState& state, const JointAction& actions,
                nn::RngStream& channel_rng) {
  const int n = scenario.num_agents();
  if (static_cast<int>(actions.size()) != n) {
    throw std::invalid_argument(fmt::format("step: {} actions for {} agents", actions.size(), n));
  }
  std::vector<int> movement(n, 0);
  for (int i = 0; i < n; ++i) {
    const comm::ActionLayout& layout = scenario.layout.action(i);
    if (actions[i].size() != layout.total_dim()) {
      throw std::invalid_argument(fmt::format(
          "step: agent {} action has {} entries, layout expects {}", i,
          actions[i].size(), layout.total_dim()));
    }
    movement[i] = scenario.agents[i].mobile ? MovementIndex(scenario, i, actions[i]) : 0;
    state.decode_outputs[i] = actions[i].segment(layout.continuous_offset, layout.continuous_dim);
  }
  const comm::CommGraph& g = scenario.graph();
  for (int e = 0; e < g.num_edges(); ++e) {
    const int sender = g.edge(e).sender;
    const comm::MessageBlock& block =
        scenario.layout.action(sender).messages[scenario.layout.edge_block(e)];
    state.pending_messages[e] = Transmit(scenario.channel, actions[sender].segment(block.offset, block.dim),
                                         g.edge(e).dim, channel_rng);
  }
  state = PhysicsStep(scenario, std::move(state), movement);
  StepResult result;
  result.rewards = Reward(scenario, state);
  result.obs = Observe(scenario, state);
  result.done = state.step >= scenario.episode_length;
  return result;
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out) : out_(out) {
  out_ << "episode,step,agent,pos_x,pos_y,action,message,reward\n";
}

void TrajectoryWriter::Write(const Scenario& scenario, int episode, int step,
                             const WorldState& state, const JointAction& actions,
                             const std::vector<double>& rewards) {
  for (int i = 0; i < scenario.num_agents(); ++i) {
    const comm::ActionLayout& layout = scenario.layout.action(i);
    const int move = layout.movement_dim > 0 ? MovementIndex(scenario, i, actions[i]) : -1;
    const int msg = layout.messages.empty()
                        ? -1
                        : Argmax(actions[i].segment(layout.messages[0].offset,
                                                    layout.messages[0].dim));
    out_ << fmt::format("{},{},{},{:.6f},{:.6f},{},{},{:.6f}\n", episode, step, i,
                        state.agent_pos[i].x(), state.agent_pos[i].y(), move, msg,
                        rewards[i]);
  }
}

}  // namespace commcorr::env
