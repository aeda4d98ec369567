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

#include "commcorr/comm/comm_graph.h"

#include <algorithm>

#include <fmt/format.h>

namespace commcorr::comm {

namespace {

Adjacency BoolProduct(const Adjacency& a, const Adjacency& b) {
  const size_t n = a.size();
  Adjacency out(n, std::vector<int>(n, 0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = 0; k < n; ++k) {
      if (!a[i][k]) continue;
      for (size_t j = 0; j < n; ++j) {
        if (b[k][j]) out[i][j] = 1;
      }
    }
  }
  return out;
}

bool IsZero(const Adjacency& m) {
  for (const auto& row : m) {
    for (int v : row) {
      if (v != 0) return false;
    }
  }
  return true;
}

}  // namespace

int NilpotencyIndex(const Adjacency& adjacency) {
  const size_t n = adjacency.size();
  for (const auto& row : adjacency) {
    if (row.size() != n) {
      throw std::invalid_argument("NilpotencyIndex: adjacency must be square");
    }
    for (int v : row) {
      if (v != 0 && v != 1) {
        throw std::invalid_argument("NilpotencyIndex: entries must be 0 or 1");
      }
    }
  }
  if (n == 0) return 1;
  // Paths in a DAG on n nodes have at most n - 1 edges, so D^n = 0 always.
  Adjacency power = adjacency;
  for (size_t s = 1; s <= n; ++s) {
    if (IsZero(power)) return static_cast<int>(s);
    power = BoolProduct(power, adjacency);
  }
  throw NotADagError(fmt::format(
      "communication graph is not a DAG: D^{} != 0 (cycle present)", n));
}

CommGraph::CommGraph(int num_agents, std::vector<CommEdge> edges)
    : num_agents_(num_agents), edges_(std::move(edges)) {
  if (num_agents <= 0) throw std::invalid_argument("CommGraph: need >= 1 agent");
  Adjacency adj(num_agents, std::vector<int>(num_agents, 0));
  for (const CommEdge& e : edges_) {
    if (e.sender < 0 || e.sender >= num_agents || e.receiver < 0 ||
        e.receiver >= num_agents) {
      throw std::invalid_argument(fmt::format(
          "CommGraph: edge {}->{} out of range for {} agents", e.sender,
          e.receiver, num_agents));
    }
    if (e.dim <= 0) {
      throw std::invalid_argument(fmt::format(
          "CommGraph: edge {}->{} has non-positive dimension {}", e.sender,
          e.receiver, e.dim));
    }
    if (adj[e.sender][e.receiver]) {
      throw std::invalid_argument(fmt::format(
          "CommGraph: duplicate edge {}->{}", e.sender, e.receiver));
    }
    adj[e.sender][e.receiver] = 1;
  }
  nilpotency_index_ = NilpotencyIndex(adj);

  in_edges_.assign(num_agents, {});
  out_edges_.assign(num_agents, {});
  for (int e = 0; e < num_edges(); ++e) {
    in_edges_[edges_[e].receiver].push_back(e);
    out_edges_[edges_[e].sender].push_back(e);
  }
  for (auto& v : in_edges_) {
    std::stable_sort(v.begin(), v.end(), [this](int a, int b) {
      return edges_[a].sender < edges_[b].sender;
    });
  }
  for (auto& v : out_edges_) {
    std::stable_sort(v.begin(), v.end(), [this](int a, int b) {
      return edges_[a].receiver < edges_[b].receiver;
    });
  }

  // Longest-path relaxation; n rounds suffice on a DAG.
  levels_.assign(num_agents, 0);
  height_.assign(num_agents, 0);
  for (int round = 0; round < num_agents; ++round) {
    for (const CommEdge& e : edges_) {
      levels_[e.receiver] = std::max(levels_[e.receiver], levels_[e.sender] + 1);
      height_[e.sender] = std::max(height_[e.sender], height_[e.receiver] + 1);
    }
  }
}

Adjacency CommGraph::adjacency() const {
  Adjacency adj(num_agents_, std::vector<int>(num_agents_, 0));
  for (const CommEdge& e : edges_) adj[e.sender][e.receiver] = 1;
  return adj;
}

}  // namespace commcorr::comm
