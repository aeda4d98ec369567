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

#include "commcorr/env/scenario.h"

#include <stdexcept>

#include <fmt/format.h>

#include "commcorr/util/json_keys.h"

namespace commcorr::env {

using comm::AgentActionSpec;
using comm::CommEdge;
using comm::CommGraph;
using comm::CommLayout;
using comm::kMovementDim;
using util::RejectUnknownKeys;

std::string ScenarioKindName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kCoopComm:
      return "coop_comm";
    case ScenarioKind::kHierarchicalComm:
      return "hierarchical_comm";
    case ScenarioKind::kCovertComm:
      return "covert_comm";
    case ScenarioKind::kMultiTargetComm:
      return "multi_target_comm";
  }
  return "?";
}

void PhysicsConfig::Validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument(fmt::format("physics: dt {} must be > 0", dt));
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw std::invalid_argument(fmt::format("physics: damping {} outside (0, 1]", damping));
  }
  if (max_speed && !(*max_speed > 0.0)) {
    throw std::invalid_argument("physics: max_speed must be > 0");
  }
}

namespace {

void CheckPositive(const char* what, int v) {
  if (v <= 0) throw std::invalid_argument(fmt::format("{} must be positive, got {}", what, v));
}

ChannelModel ChannelFromDrop(double drop_p) {
  return drop_p > 0.0 ? ChannelModel::Dropout(drop_p) : ChannelModel::Identity();
}

}  // namespace

Scenario MakeCoopComm(int n_landmarks, double drop_p, int message_dim) {
  CheckPositive("n_landmarks", n_landmarks);
  if (message_dim < 0) message_dim = n_landmarks;
  CheckPositive("message_dim", message_dim);
  Scenario s;
  s.kind = ScenarioKind::kCoopComm;
  s.name = ScenarioKindName(s.kind);
  s.agents = {{"speaker", Role::kSpeaker, false, 0},
              {"listener", Role::kListener, true, 0}};
  s.team_names = {"team"};
  s.num_landmarks = n_landmarks;
  CommGraph graph(2, {CommEdge{0, 1, message_dim}});
  std::vector<int> env_dims = {n_landmarks, 2 + 2 * n_landmarks};
  std::vector<AgentActionSpec> specs(2);
  specs[0] = {kMovementDim, true, {{1}}, 0};
  specs[1] = {kMovementDim, false, {}, 0};
  s.layout = CommLayout(std::move(graph), env_dims, specs);
  s.channel = ChannelFromDrop(drop_p);
  return s;
}

Scenario MakeHierarchicalComm(std::vector<int> message_dims) {
  if (message_dims.size() != 3) {
    throw std::invalid_argument("hierarchical_comm needs exactly 3 message dims");
  }
  for (int d : message_dims) CheckPositive("message dim", d);
  constexpr int kColors = 4;
  Scenario s;
  s.kind = ScenarioKind::kHierarchicalComm;
  s.name = ScenarioKindName(s.kind);
  s.agents = {{"speaker1", Role::kSpeaker, false, 0},
              {"speaker2", Role::kSpeaker, false, 0},
              {"speaker3", Role::kSpeaker, false, 0},
              {"listener", Role::kListener, true, 0}};
  s.team_names = {"team"};
  s.num_landmarks = kColors;
  CommGraph graph(4, {CommEdge{0, 1, message_dims[0]}, CommEdge{1, 2, message_dims[1]},
                      CommEdge{2, 3, message_dims[2]}});
  std::vector<int> env_dims = {kColors, kColors, kColors, 2 + 2 * kColors};
  std::vector<AgentActionSpec> specs(4);
  specs[0] = {kMovementDim, true, {{1}}, 0};
  specs[1] = {kMovementDim, true, {{2}}, 0};
  specs[2] = {kMovementDim, true, {{3}}, 0};
  specs[3] = {kMovementDim, false, {}, 0};
  s.layout = CommLayout(std::move(graph), env_dims, specs);
  return s;
}

Scenario MakeCovertComm(int msg_dim, int key_dim, bool with_key) {
  CheckPositive("msg_dim", msg_dim);
  CheckPositive("key_dim", key_dim);
  Scenario s;
  s.kind = ScenarioKind::kCovertComm;
  s.name = ScenarioKindName(s.kind);
  s.agents = {{"speaker", Role::kSpeaker, false, 0},
              {"listener", Role::kListener, false, 0},
              {"adversary", Role::kAdversary, false, 1}};
  s.team_names = {"allies", "adversary"};
  s.msg_dim = msg_dim;
  s.key_dim = key_dim;
  s.key_visible = with_key;
  const int key = with_key ? key_dim : 0;
  CommGraph graph(3, {CommEdge{0, 1, msg_dim}, CommEdge{0, 2, msg_dim}});
  std::vector<int> env_dims = {msg_dim + key, key, 0};
  std::vector<AgentActionSpec> specs(3);
  specs[0] = {0, false, {{1, 2}}, 0};
  specs[1] = {0, false, {}, msg_dim};
  specs[2] = {0, false, {}, msg_dim};
  s.layout = CommLayout(std::move(graph), env_dims, specs);
  return s;
}

Scenario MakeMultiTargetComm(int n_landmarks, std::vector<int> message_dims) {
  CheckPositive("n_landmarks", n_landmarks);
  if (message_dims.empty()) message_dims = {n_landmarks, n_landmarks};
  if (message_dims.size() != 2) {
    throw std::invalid_argument("multi_target_comm needs exactly 2 message dims");
  }
  for (int d : message_dims) CheckPositive("message dim", d);
  Scenario s;
  s.kind = ScenarioKind::kMultiTargetComm;
  s.name = ScenarioKindName(s.kind);
  s.agents = {{"speaker", Role::kSpeaker, true, 0},
              {"listener1", Role::kListener, true, 0},
              {"listener2", Role::kListener, true, 0}};
  s.team_names = {"team"};
  s.num_landmarks = n_landmarks;
  CommGraph graph(3, {CommEdge{0, 1, message_dims[0]}, CommEdge{0, 2, message_dims[1]}});
  const int nav = 2 + 2 * n_landmarks;
  std::vector<int> env_dims = {nav + 3 * n_landmarks, nav, nav};
  std::vector<AgentActionSpec> specs(3);
  specs[0] = {kMovementDim, false, {{1}, {2}}, 0};
  specs[1] = {kMovementDim, false, {}, 0};
  specs[2] = {kMovementDim, false, {}, 0};
  s.layout = CommLayout(std::move(graph), env_dims, specs);
  return s;
}

Scenario MakeScenario(const ScenarioOptions& o) {
  o.physics.Validate();
  if (o.drop_p > 0.0 && o.noise_sigma > 0.0) {
    throw std::invalid_argument("scenario: drop_p and noise_sigma are exclusive");
  }
  Scenario s;
  if (o.name == "coop_comm") {
    if (o.message_dims.size() > 1) {
      throw std::invalid_argument("coop_comm takes at most one message dim");
    }
    s = MakeCoopComm(o.n_landmarks.value_or(5), 0.0,
                     o.message_dims.empty() ? -1 : o.message_dims[0]);
  } else if (o.name == "hierarchical_comm") {
    if (o.n_landmarks && *o.n_landmarks != 4) {
      throw std::invalid_argument("hierarchical_comm has exactly 4 landmarks");
    }
    s = o.message_dims.empty() ? MakeHierarchicalComm()
                               : MakeHierarchicalComm(o.message_dims);
  } else if (o.name == "covert_comm") {
    if (o.n_landmarks) throw std::invalid_argument("covert_comm has no landmarks");
    if (!o.message_dims.empty()) {
      throw std::invalid_argument("covert_comm: use msg_dim, not message_dims");
    }
    s = MakeCovertComm(o.msg_dim, o.key_dim, o.with_key);
  } else if (o.name == "multi_target_comm") {
    s = MakeMultiTargetComm(o.n_landmarks.value_or(5), o.message_dims);
  } else {
    throw std::invalid_argument("unknown scenario '" + o.name + "'");
  }
  if (o.drop_p > 0.0) s.channel = ChannelModel::Dropout(o.drop_p);
  if (o.noise_sigma > 0.0) s.channel = ChannelModel::Gaussian(o.noise_sigma);
  s.physics = o.physics;
  return s;
}

ScenarioOptions ParseScenarioOptions(const nlohmann::json& j) {
  RejectUnknownKeys(j,
                    {"name", "n_landmarks", "drop_p", "noise_sigma", "message_dims",
                     "msg_dim", "key_dim", "with_key", "physics"},
                    "scenario");
  ScenarioOptions o;
  o.name = j.at("name").get<std::string>();
  if (j.contains("n_landmarks")) o.n_landmarks = j["n_landmarks"].get<int>();
  o.drop_p = j.value("drop_p", 0.0);
  o.noise_sigma = j.value("noise_sigma", 0.0);
  if (j.contains("message_dims")) o.message_dims = j["message_dims"].get<std::vector<int>>();
  o.msg_dim = j.value("msg_dim", 4);
  o.key_dim = j.value("key_dim", 4);
  o.with_key = j.value("with_key", true);
  if (j.contains("physics")) {
    const auto& p = j["physics"];
    RejectUnknownKeys(p, {"dt", "damping", "force_scale", "max_speed"}, "scenario.physics");
    o.physics.dt = p.value("dt", o.physics.dt);
    o.physics.damping = p.value("damping", o.physics.damping);
    o.physics.force_scale = p.value("force_scale", o.physics.force_scale);
    if (p.contains("max_speed") && !p["max_speed"].is_null()) {
      o.physics.max_speed = p["max_speed"].get<double>();
    }
  }
  MakeScenario(o);  // validates
  return o;
}

nlohmann::json ScenarioOptionsToJson(const ScenarioOptions& o) {
  nlohmann::json j;
  j["name"] = o.name;
  if (o.n_landmarks) j["n_landmarks"] = *o.n_landmarks;
  j["drop_p"] = o.drop_p;
  j["noise_sigma"] = o.noise_sigma;
  if (!o.message_dims.empty()) j["message_dims"] = o.message_dims;
  if (o.name == "covert_comm") {
    j["msg_dim"] = o.msg_dim;
    j["key_dim"] = o.key_dim;
    j["with_key"] = o.with_key;
  }
  nlohmann::json p;
  p["dt"] = o.physics.dt;
  p["damping"] = o.physics.damping;
  p["force_scale"] = o.physics.force_scale;
  p["max_speed"] = o.physics.max_speed ? nlohmann::json(*o.physics.max_speed)
                                       : nlohmann::json(nullptr);
  j["physics"] = p;
  return j;
}

}  // namespace commcorr::env
