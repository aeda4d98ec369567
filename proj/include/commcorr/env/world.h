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

#ifndef COMMCORR_ENV_WORLD_H_
#define COMMCORR_ENV_WORLD_H_

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "commcorr/env/scenario.h"
#include "commcorr/nn/rng.h"

namespace commcorr::env {

using Vec2 = Eigen::Vector2d;
// Per-agent vectors, agent index order.
using JointObs = std::vector<Vector>;
using JointAction = std::vector<Vector>;

struct WorldState {
  std::vector<Vec2> agent_pos;
  std::vector<Vec2> agent_vel;
  std::vector<Vec2> landmark_pos;  // landmark index doubles as its colour
  std::vector<int> target;         // per agent landmark index, -1 if none
  std::vector<int> known_color;    // hierarchical: colour known not to be target
  int covert_message = -1;
  int covert_key = -1;
  std::vector<Vector> pending_messages;  // per graph edge, seen next observation
  std::vector<Vector> decode_outputs;    // per agent continuous block
  int step = 0;
};

struct ResetResult {
  WorldState state;
  JointObs obs;
};

// Positions uniform in [-1, 1]^2, zero velocities, empty (zero) messages.
ResetResult Reset(const Scenario& scenario, nn::RngStream& rng);

// One physics tick. `movement[i]` in [0, kMovementDim); immobile agents must
// pass 0 (no-op).
WorldState PhysicsStep(const Scenario& scenario, WorldState state,
                       const std::vector<int>& movement);

JointObs Observe(const Scenario& scenario, const WorldState& state);

std::vector<double> Reward(const Scenario& scenario, const WorldState& state);

struct StepResult {
  JointObs obs;
  std::vector<double> rewards;
  bool done = false;
};

// Applies a joint action: messages go through the channel into
// pending_messages, decode blocks are recorded, physics advances, then rewards
// and next observations are computed.
StepResult Step(const Scenario& scenario, WorldState& state, const JointAction& actions,
                nn::RngStream& channel_rng);

// Movement index carried by an agent's action vector (0 for masked/absent).
int MovementIndex(const Scenario& scenario, int agent, const Vector& action);

// Per-step CSV trajectory dump:
//   episode,step,agent,pos_x,pos_y,action,message,reward
// `action` is the movement index (-1 when the agent has no movement block),
// `message` the argmax of the agent's first message block (-1 if none).
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out);
  void Write(const Scenario& scenario, int episode, int step, const WorldState& state,
             const JointAction& actions, const std::vector<double>& rewards);

 private:
  std::ostream& out_;
};

}  // namespace commcorr::env

#endif  // COMMCORR_ENV_WORLD_H_
