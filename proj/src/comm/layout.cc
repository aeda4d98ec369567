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

#include "commcorr/comm/layout.h"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::comm {

int ObservationLayout::total_dim() const {
  int n = env_dim;
  for (const CommSlot& s : slots) n += s.dim;
  return n;
}

int ActionLayout::message_dim() const {
  int n = 0;
  for (const MessageBlock& b : messages) n += b.dim;
  return n;
}

CommLayout::CommLayout(CommGraph graph, std::vector<int> env_obs_dims,
                       std::vector<AgentActionSpec> action_specs)
    : graph_(std::move(graph)) {
  const int n = graph_.num_agents();
  if (static_cast<int>(env_obs_dims.size()) != n ||
      static_cast<int>(action_specs.size()) != n) {
    throw std::invalid_argument(fmt::format(
        "CommLayout: {} agents but {} observation dims and {} action specs", n,
        env_obs_dims.size(), action_specs.size()));
  }

  obs_.resize(n);
  for (int i = 0; i < n; ++i) {
    if (env_obs_dims[i] < 0) throw std::invalid_argument("negative env obs dim");
    ObservationLayout& ol = obs_[i];
    ol.env_dim = env_obs_dims[i];
    int at = ol.env_dim;
    for (int e : graph_.in_edges(i)) {
      const CommEdge& edge = graph_.edge(e);
      ol.slots.push_back({e, edge.sender, at, edge.dim});
      at += edge.dim;
    }
  }

  edge_block_.assign(graph_.num_edges(), -1);
  actions_.resize(n);
  for (int i = 0; i < n; ++i) {
    const AgentActionSpec& spec = action_specs[i];
    if (spec.movement_dim != 0 && spec.movement_dim != kMovementDim) {
      throw std::invalid_argument(fmt::format(
          "agent {}: movement block must have 0 or {} entries", i, kMovementDim));
    }
    if (spec.continuous_dim < 0) throw std::invalid_argument("negative continuous dim");
    ActionLayout& al = actions_[i];
    al.movement_dim = spec.movement_dim;
    al.movement_masked = spec.movement_masked && spec.movement_dim > 0;
    int at = al.movement_dim;
    for (const auto& receivers : spec.message_receivers) {
      MessageBlock block;
      block.offset = at;
      for (int r : receivers) {
        int found = -1;
        for (int e : graph_.out_edges(i)) {
          if (graph_.edge(e).receiver == r) found = e;
        }
        if (found < 0) {
          throw std::invalid_argument(fmt::format(
              "agent {}: message block targets {} but graph has no edge {}->{}",
              i, r, i, r));
        }
        if (edge_block_[found] >= 0) {
          throw std::invalid_argument(fmt::format(
              "edge {}->{} is fed by more than one message block", i, r));
        }
        const int dim = graph_.edge(found).dim;
        if (block.dim != 0 && block.dim != dim) {
          throw std::invalid_argument(fmt::format(
              "agent {}: broadcast block feeds edges of different dims", i));
        }
        block.dim = dim;
        block.edges.push_back(found);
        edge_block_[found] = static_cast<int>(al.messages.size());
      }
      if (block.edges.empty()) {
        throw std::invalid_argument(fmt::format("agent {}: empty message block", i));
      }
      at += block.dim;
      al.messages.push_back(std::move(block));
    }
    al.continuous_offset = at;
    al.continuous_dim = spec.continuous_dim;
  }
  for (int e = 0; e < graph_.num_edges(); ++e) {
    if (edge_block_[e] < 0) {
      throw std::invalid_argument(fmt::format(
          "edge {}->{} has no message block at its sender", graph_.edge(e).sender,
          graph_.edge(e).receiver));
    }
  }

  obs_offsets_.resize(n);
  action_offsets_.resize(n);
  for (int i = 0; i < n; ++i) {
    obs_offsets_[i] = joint_obs_dim_;
    joint_obs_dim_ += obs_[i].total_dim();
    action_offsets_[i] = joint_action_dim_;
    joint_action_dim_ += actions_[i].total_dim();
  }
  joint_slot_offset_.resize(graph_.num_edges());
  joint_message_offset_.resize(graph_.num_edges());
  for (int i = 0; i < n; ++i) {
    for (const CommSlot& s : obs_[i].slots) {
      joint_slot_offset_[s.edge] = obs_offsets_[i] + s.offset;
    }
  }
  for (int e = 0; e < graph_.num_edges(); ++e) {
    const int sender = graph_.edge(e).sender;
    joint_message_offset_[e] =
        action_offsets_[sender] + actions_[sender].messages[edge_block_[e]].offset;
  }
}

}  // namespace commcorr::comm
