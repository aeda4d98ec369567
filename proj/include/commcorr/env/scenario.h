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

#ifndef COMMCORR_ENV_SCENARIO_H_
#define COMMCORR_ENV_SCENARIO_H_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commcorr/comm/layout.h"
#include "commcorr/env/channel.h"

namespace commcorr::env {

enum class ScenarioKind { kCoopComm, kHierarchicalComm, kCovertComm, kMultiTargetComm };
enum class Role { kSpeaker, kListener, kAdversary };

std::string ScenarioKindName(ScenarioKind kind);

struct AgentSpec {
  std::string name;
  Role role = Role::kSpeaker;
  bool mobile = false;
  int team = 0;
};

struct PhysicsConfig {
  double dt = 0.1;
  double damping = 0.75;  // fraction of velocity kept each step
  double force_scale = 5.0;
  std::optional<double> max_speed;

  void Validate() const;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::kCoopComm;
  std::string name;
  std::vector<AgentSpec> agents;
  std::vector<std::string> team_names;
  int num_landmarks = 0;
  comm::CommLayout layout;
  ChannelModel channel;
  PhysicsConfig physics;
  int episode_length = 25;
  // Covert communication only.
  int msg_dim = 0;
  int key_dim = 0;
  bool key_visible = true;

  int num_agents() const { return static_cast<int>(agents.size()); }
  const comm::CommGraph& graph() const { return layout.graph(); }
  int num_teams() const { return static_cast<int>(team_names.size()); }
};

// Speaker (immobile, sees the target colour) -> Listener (mobile).
Scenario MakeCoopComm(int n_landmarks = 5, double drop_p = 0.0, int message_dim = -1);

// Chain S1 -> S2 -> S3 -> Listener over 4 landmarks. Each speaker sees one
// distinct non-target colour.
Scenario MakeHierarchicalComm(std::vector<int> message_dims = {4, 6, 4});

// Speaker broadcasts to Listener and Adversary. The secret and the key are
// one-hot symbols; decoders emit tanh-squashed continuous guesses.
Scenario MakeCovertComm(int msg_dim = 4, int key_dim = 4, bool with_key = true);

// Mobile speaker sees three target colours and messages two listeners.
Scenario MakeMultiTargetComm(int n_landmarks = 5, std::vector<int> message_dims = {});

// Structured scenario description. JSON schema (unknown keys rejected):
//   name          string   coop_comm | hierarchical_comm | covert_comm |
//                          multi_target_comm
//   n_landmarks   int      coop_comm / multi_target_comm (default 5)
//   drop_p        number   dropout probability on every edge (default 0)
//   noise_sigma   number   Gaussian channel std-dev (default 0)
//   message_dims  [int]    per-edge alphabets in graph edge order
//   msg_dim       int      covert secret size (default 4)
//   key_dim       int      covert key size (default 4)
//   with_key      bool     covert: allies observe the key (default true)
//   physics       object   {dt, damping, force_scale, max_speed}
struct ScenarioOptions {
  std::string name = "coop_comm";
  std::optional<int> n_landmarks;
  double drop_p = 0.0;
  double noise_sigma = 0.0;
  std::vector<int> message_dims;
  int msg_dim = 4;
  int key_dim = 4;
  bool with_key = true;
  PhysicsConfig physics;
};

Scenario MakeScenario(const ScenarioOptions& options);
ScenarioOptions ParseScenarioOptions(const nlohmann::json& j);
nlohmann::json ScenarioOptionsToJson(const ScenarioOptions& options);

}  // namespace commcorr::env

#endif  // COMMCORR_ENV_SCENARIO_H_
