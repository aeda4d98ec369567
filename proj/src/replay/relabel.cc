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

#include "commcorr/replay/relabel.h"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::replay {

std::string CorrectionModeName(CorrectionMode mode) {
  switch (mode) {
    case CorrectionMode::kNone:
      return "none";
    case CorrectionMode::kFirstStep:
      return "fcc";
    case CorrectionMode::kOrdered:
      return "occ";
  }
  return "?";
}

CorrectionMode ParseCorrectionMode(const std::string& name) {
  if (name == "none") return CorrectionMode::kNone;
  if (name == "fcc") return CorrectionMode::kFirstStep;
  if (name == "occ") return CorrectionMode::kOrdered;
  throw std::invalid_argument("unknown correction mode '" + name + "' (none|fcc|occ)");
}

Batch OriginalBatch(const MinibatchWindow& window) {
  Batch b;
  b.obs = window.obs.back();
  b.action = window.action;
  b.rewards = window.rewards;
  b.next_obs = window.next_obs;
  b.terminal = window.terminal;
  b.fingerprint = window.fingerprint;
  return b;
}

std::vector<int> Senders(const comm::CommLayout& layout) {
  std::vector<int> out;
  for (int i = 0; i < layout.num_agents(); ++i) {
    if (!layout.graph().out_edges(i).empty()) out.push_back(i);
  }
  return out;
}

Matrix SampleMessages(const comm::CommLayout& layout, const PolicySet& policies,
                      const Matrix& obs, const Matrix& action_base,
                      const std::vector<int>& senders, const RelabelOptions& options,
                      nn::RngStream& rng) {
  if (obs.cols() != layout.joint_obs_dim() || action_base.cols() != layout.joint_action_dim() ||
      obs.rows() != action_base.rows()) {
    throw std::invalid_argument(fmt::format(
        "relabel: got {}x{} observations and {}x{} actions, layout is {} / {}", obs.rows(),
        obs.cols(), action_base.rows(), action_base.cols(), layout.joint_obs_dim(),
        layout.joint_action_dim()));
  }
  if (policies.num_agents() != layout.num_agents()) {
    throw std::invalid_argument("relabel: policy set does not match the layout");
  }
  Matrix out = action_base;
  for (int j : senders) {
    const comm::ActionLayout& al = layout.action(j);
    const Matrix own = obs.middleCols(layout.obs_offset(j), layout.obs(j).total_dim());
    const Matrix act = policies.Act(j, own, options.explore, rng);
    if (act.rows() != obs.rows() || act.cols() != al.total_dim()) {
      throw std::invalid_argument(fmt::format(
          "relabel: policy {} returned {}x{}, expected {}x{}", j, act.rows(), act.cols(),
          obs.rows(), al.total_dim()));
    }
    for (const comm::MessageBlock& b : al.messages) {
      out.middleCols(layout.action_offset(j) + b.offset, b.dim) = act.middleCols(b.offset, b.dim);
    }
  }
  return out;
}

Matrix DeliverMessages(const comm::CommLayout& layout, const env::ChannelModel& channel,
                       const Matrix& messages, const Matrix& next_env_source,
                       const std::vector<int>& senders, nn::RngStream& rng) {
  Matrix next = next_env_source;
  for (int j : senders) {
    for (int e : layout.graph().out_edges(j)) {
      const int dim = layout.graph().edge(e).dim;
      Matrix slot = messages.middleCols(layout.joint_message_offset(e), dim);
      env::TransmitRows(channel, slot, rng);
      next.middleCols(layout.joint_slot_offset(e), dim) = slot;
    }
  }
  return next;
}

Matrix RelabelStep(const comm::CommLayout& layout, const PolicySet& policies,
                   const env::ChannelModel& channel, const Matrix& obs_hat,
                   const Matrix& next_stored, const RelabelOptions& options, nn::RngStream& rng) {
  const std::vector<int> senders = Senders(layout);
  const Matrix msgs =
      SampleMessages(layout, policies, obs_hat,
                     Matrix::Zero(obs_hat.rows(), layout.joint_action_dim()), senders, options, rng);
  return DeliverMessages(layout, channel, msgs, next_stored, senders, rng);
}

Batch OccRelabel(const comm::CommLayout& layout, const PolicySet& policies,
                 const env::ChannelModel& channel, const MinibatchWindow& window,
                 const RelabelOptions& options, nn::RngStream& rng) {
  const int K = window.K;
  const int B = window.batch_size();
  const std::vector<int> all = Senders(layout);
  const std::vector<int>& height = layout.graph().height();

  Batch out = OriginalBatch(window);
  Matrix hat = window.obs[0];
  for (int p = 0; p <= K; ++p) {
    // Samples whose clamped start is at or after p restart from stored data.
    for (int b = 0; b < B; ++b) {
      if (K - window.effective_length[b] >= p) hat.row(b) = window.obs[p].row(b);
    }
    if (p == K) out.obs = hat;
    const int c = K - p;
    std::vector<int> senders;
    for (int j : all) {
      if (!options.prune || c == 0 || height[j] >= c) senders.push_back(j);
    }
    const Matrix msgs =
        SampleMessages(layout, policies, hat, window.action, senders, options, rng);
    const Matrix& next_src = p < K ? window.obs[p + 1] : window.next_obs;
    hat = DeliverMessages(layout, channel, msgs, next_src, senders, rng);
    if (p == K) out.action = msgs;
  }
  out.next_obs = hat;
  return out;
}

Batch FccRelabel(const comm::CommLayout& layout, const PolicySet& policies,
                 const env::ChannelModel& channel, const MinibatchWindow& window,
                 const RelabelOptions& options, nn::RngStream& rng) {
  if (window.K < 1) throw std::invalid_argument("fcc_relabel needs a window with K >= 1");
  const int K = window.K;
  const std::vector<int> senders = Senders(layout);
  const Matrix& prev = window.obs[K - 1];
  const Matrix& cur = window.obs[K];

  Batch out = OriginalBatch(window);
  const Matrix prev_msgs = SampleMessages(layout, policies, prev, window.action, senders,
                                          options, rng);
  out.obs = DeliverMessages(layout, channel, prev_msgs, cur, senders, rng);
  for (int b = 0; b < window.batch_size(); ++b) {
    if (window.effective_length[b] == 0) out.obs.row(b) = cur.row(b);
  }
  // Current messages come from the stored o_t, not the corrected one.
  out.action = SampleMessages(layout, policies, cur, window.action, senders, options, rng);
  out.next_obs = DeliverMessages(layout, channel, out.action, window.next_obs, senders, rng);
  return out;
}

Batch PerAgentRestore(const comm::CommLayout& layout, const Batch& relabelled,
                      const Batch& original, int agent) {
  Batch out = relabelled;
  const comm::ActionLayout& al = layout.action(agent);
  const int base = layout.action_offset(agent);
  for (const comm::MessageBlock& b : al.messages) {
    out.action.middleCols(base + b.offset, b.dim) = original.action.middleCols(base + b.offset, b.dim);
  }
  for (int e : layout.graph().out_edges(agent)) {
    const int col = layout.joint_slot_offset(e);
    const int dim = layout.graph().edge(e).dim;
    out.obs.middleCols(col, dim) = original.obs.middleCols(col, dim);
    out.next_obs.middleCols(col, dim) = original.next_obs.middleCols(col, dim);
  }
  return out;
}

std::vector<Batch> AssembleBatches(const comm::CommLayout& layout, const PolicySet& policies,
                                   const env::ChannelModel& channel,
                                   const MinibatchWindow& window,
                                   const std::vector<CorrectionMode>& modes,
                                   const RelabelOptions& options, nn::RngStream& rng) {
  const int n = layout.num_agents();
  if (static_cast<int>(modes.size()) != n) {
    throw std::invalid_argument(
        fmt::format("assemble_batches: {} modes for {} agents", modes.size(), n));
  }
  const Batch original = OriginalBatch(window);
  const bool need_fcc = std::count(modes.begin(), modes.end(), CorrectionMode::kFirstStep) > 0;
  const bool need_occ = std::count(modes.begin(), modes.end(), CorrectionMode::kOrdered) > 0;
  Batch fcc, occ;
  if (need_fcc) fcc = FccRelabel(layout, policies, channel, window, options, rng);
  if (need_occ) occ = OccRelabel(layout, policies, channel, window, options, rng);

  std::vector<Batch> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    switch (modes[i]) {
      case CorrectionMode::kNone:
        out.push_back(original);
        break;
      case CorrectionMode::kFirstStep:
        out.push_back(PerAgentRestore(layout, fcc, original, i));
        break;
      case CorrectionMode::kOrdered:
        out.push_back(PerAgentRestore(layout, occ, original, i));
        break;
    }
  }
  return out;
}

namespace {

int BlockArgmax(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  if ((v.array() == 0.0).all()) return -1;
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

void WriteMessagePairsCsv(std::ostream& out, const comm::CommLayout& layout,
                          const Batch& original, const Batch& relabelled) {
  out << "sample,edge,sender,receiver,original,relabelled\n";
  const comm::CommGraph& g = layout.graph();
  for (int b = 0; b < original.batch_size(); ++b) {
    for (int e = 0; e < g.num_edges(); ++e) {
      const int col = layout.joint_message_offset(e);
      const int dim = g.edge(e).dim;
      out << fmt::format("{},{},{},{},{},{}\n", b, e, g.edge(e).sender, g.edge(e).receiver,
                         BlockArgmax(original.action.row(b).segment(col, dim)),
                         BlockArgmax(relabelled.action.row(b).segment(col, dim)));
    }
  }
}

}  // namespace commcorr::replay
