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

#ifndef COMMCORR_COMM_COMM_GRAPH_H_
#define COMMCORR_COMM_COMM_GRAPH_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace commcorr::comm {

// Thrown when a communication topology contains a directed cycle.
class NotADagError : public std::invalid_argument {
 public:
  explicit NotADagError(const std::string& what) : std::invalid_argument(what) {}
};

struct CommEdge {
  int sender = 0;
  int receiver = 0;
  int dim = 0;  // message dimensionality carried on this edge
};

using Adjacency = std::vector<std::vector<int>>;

// Smallest s >= 1 with D^s = 0 for a square 0/1 adjacency matrix. Throws
// NotADagError when no such s <= n exists (i.e. the graph has a cycle,
// including self-loops).
int NilpotencyIndex(const Adjacency& adjacency);

// Directed acyclic communication topology over `num_agents` agents.
class CommGraph {
 public:
  CommGraph() = default;
  // Validates agent indices, positive dims, no duplicate edges, acyclicity.
  CommGraph(int num_agents, std::vector<CommEdge> edges);

  int num_agents() const { return num_agents_; }
  const std::vector<CommEdge>& edges() const { return edges_; }
  const CommEdge& edge(int e) const { return edges_.at(e); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  Adjacency adjacency() const;
  // s: smallest power with D^s = 0. The ordered correction needs k = s - 1.
  int nilpotency_index() const { return nilpotency_index_; }
  int correction_depth() const { return nilpotency_index_ - 1; }

  // Longest path (in edges) from any root to the agent.
  const std::vector<int>& levels() const { return levels_; }
  // Longest path (in edges) from the agent down to a leaf.
  const std::vector<int>& height() const { return height_; }

  // Edge indices into `agent`, ordered by sender index.
  const std::vector<int>& in_edges(int agent) const { return in_edges_.at(agent); }
  // Edge indices out of `agent`, ordered by receiver index.
  const std::vector<int>& out_edges(int agent) const { return out_edges_.at(agent); }

 private:
  int num_agents_ = 0;
  std::vector<CommEdge> edges_;
  int nilpotency_index_ = 1;
  std::vector<int> levels_;
  std::vector<int> height_;
  std::vector<std::vector<int>> in_edges_;
  std::vector<std::vector<int>> out_edges_;
};

}  // namespace commcorr::comm

#endif  // COMMCORR_COMM_COMM_GRAPH_H_
