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

#ifndef COMMCORR_COMM_LAYOUT_H_
#define COMMCORR_COMM_LAYOUT_H_

#include <vector>

#include "commcorr/comm/comm_graph.h"

namespace commcorr::comm {

// Movement is a 5-way discrete choice {no-op, +x, -x, +y, -y}.
inline constexpr int kMovementDim = 5;

// One communication slot inside a receiver's observation vector.
struct CommSlot {
  int edge = 0;
  int sender = 0;
  int offset = 0;
  int dim = 0;
};

// Observation vector = environment block [0, env_dim) followed by one slot per
// in-edge, ordered by sender index.
struct ObservationLayout {
  int env_dim = 0;
  std::vector<CommSlot> slots;

  int total_dim() const;
};

// A one-hot message block in a sender's action vector. A block may feed more
// than one edge (broadcast).
struct MessageBlock {
  int offset = 0;
  int dim = 0;
  std::vector<int> edges;
};

// Action vector = movement block (kMovementDim or 0 entries) followed by the
// message blocks, then an optional continuous block. A masked movement block
// is always the no-op one-hot.
struct ActionLayout {
  int movement_dim = 0;
  bool movement_masked = false;
  std::vector<MessageBlock> messages;
  int continuous_offset = 0;
  int continuous_dim = 0;

  int total_dim() const { return continuous_offset + continuous_dim; }
  int message_dim() const;
};

// What an agent sends and decodes, used to build a CommLayout.
struct AgentActionSpec {
  int movement_dim = 0;
  bool movement_masked = false;
  // Each inner vector lists the receivers fed by one message block. Block
  // dimension is taken from the corresponding graph edges (which must agree).
  std::vector<std::vector<int>> message_receivers;
  int continuous_dim = 0;
};

// Per-agent observation/action layouts plus the joint (concatenated) layout
// used by replay storage and centralized critics. Joint vectors concatenate
// agents in index order.
class CommLayout {
 public:
  CommLayout() = default;
  CommLayout(CommGraph graph, std::vector<int> env_obs_dims,
             std::vector<AgentActionSpec> action_specs);

  const CommGraph& graph() const { return graph_; }
  int num_agents() const { return graph_.num_agents(); }
  const ObservationLayout& obs(int agent) const { return obs_.at(agent); }
  const ActionLayout& action(int agent) const { return actions_.at(agent); }

  int obs_offset(int agent) const { return obs_offsets_.at(agent); }
  int action_offset(int agent) const { return action_offsets_.at(agent); }
  int joint_obs_dim() const { return joint_obs_dim_; }
  int joint_action_dim() const { return joint_action_dim_; }

  // Sender block feeding edge e.
  int edge_block(int e) const { return edge_block_.at(e); }
  // Column of edge e's slot in the joint observation.
  int joint_slot_offset(int e) const { return joint_slot_offset_.at(e); }
  // Column of edge e's source block in the joint action.
  int joint_message_offset(int e) const { return joint_message_offset_.at(e); }

 private:
  CommGraph graph_;
  std::vector<ObservationLayout> obs_;
  std::vector<ActionLayout> actions_;
  std::vector<int> obs_offsets_;
  std::vector<int> action_offsets_;
  std::vector<int> edge_block_;
  std::vector<int> joint_slot_offset_;
  std::vector<int> joint_message_offset_;
  int joint_obs_dim_ = 0;
  int joint_action_dim_ = 0;
};

}  // namespace commcorr::comm

#endif  // COMMCORR_COMM_LAYOUT_H_
