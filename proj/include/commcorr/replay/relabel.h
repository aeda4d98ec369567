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

#ifndef COMMCORR_REPLAY_RELABEL_H_
#define COMMCORR_REPLAY_RELABEL_H_

#include <ostream>
#include <string>
#include <vector>

#include "commcorr/comm/layout.h"
#include "commcorr/env/channel.h"
#include "commcorr/replay/buffer.h"

namespace commcorr::replay {

// Current policies of all agents, queried row-wise on per-agent observations.
class PolicySet {
 public:
  virtual ~PolicySet() = default;
  virtual int num_agents() const = 0;
  // obs: B x obs dim of `agent`. Returns B x action dim of `agent`, one-hot
  // per discrete block. explore = Gumbel sample (beta 1), else greedy.
  virtual Matrix Act(int agent, const Matrix& obs, bool explore, nn::RngStream& rng) const = 0;
};

enum class CorrectionMode { kNone, kFirstStep, kOrdered };

std::string CorrectionModeName(CorrectionMode mode);
CorrectionMode ParseCorrectionMode(const std::string& name);

struct RelabelOptions {
  bool explore = true;  // false: greedy messages (deterministic)
  bool prune = true;    // skip messages with no downstream effect
};

// Joint minibatch as consumed by one agent's updates.
struct Batch {
  Matrix obs;       // o_t or relabelled
  Matrix action;    // a_t or relabelled
  Matrix rewards;   // B x N, never relabelled
  Matrix next_obs;  // o_{t+1} or relabelled
  Vector terminal;
  Vector fingerprint;

  int batch_size() const { return static_cast<int>(obs.rows()); }
};
using PerAgentBatch = Batch;

// Stored data of a window, untouched.
Batch OriginalBatch(const MinibatchWindow& window);

// Agents with at least one out-edge, ascending.
std::vector<int> Senders(const comm::CommLayout& layout);

// Messages each agent's current policy emits on joint observations `obs`
// (B x joint_obs_dim), written into a copy of `action_base` at the message
// columns of the agents in `senders`.
Matrix SampleMessages(const comm::CommLayout& layout, const PolicySet& policies,
                      const Matrix& obs, const Matrix& action_base,
                      const std::vector<int>& senders, const RelabelOptions& options,
                      nn::RngStream& rng);

// One relabelling step: the next joint observation is the stored environment
// part `next_env_source` with the slots of every edge whose sender is in
// `senders` replaced by channel(messages).
Matrix DeliverMessages(const comm::CommLayout& layout, const env::ChannelModel& channel,
                       const Matrix& messages, const Matrix& next_env_source,
                       const std::vector<int>& senders, nn::RngStream& rng);

// relabel_step: o_hat_{tau+1} from o_hat_tau and stored o^e_{tau+1}.
Matrix RelabelStep(const comm::CommLayout& layout, const PolicySet& policies,
                   const env::ChannelModel& channel, const Matrix& obs_hat,
                   const Matrix& next_stored, const RelabelOptions& options, nn::RngStream& rng);

// Ordered correction over the window's K steps (per-sample start clamped at
// the episode start). Returns relabelled o_t, a_t, o_{t+1}.
Batch OccRelabel(const comm::CommLayout& layout, const PolicySet& policies,
                 const env::ChannelModel& channel, const MinibatchWindow& window,
                 const RelabelOptions& options, nn::RngStream& rng);

// First-step correction: o^m_t from stored o_{t-1}, then a^m_t and o^m_{t+1}
// from stored o_t. Needs a window with K >= 1 (uses the last two entries).
Batch FccRelabel(const comm::CommLayout& layout, const PolicySet& policies,
                 const env::ChannelModel& channel, const MinibatchWindow& window,
                 const RelabelOptions& options, nn::RngStream& rng);

// Restores agent i's own message action at t and the receiver slots fed by
// agent i in o_t and o_{t+1} to their stored values.
Batch PerAgentRestore(const comm::CommLayout& layout, const Batch& relabelled,
                      const Batch& original, int agent);

// One batch per agent. Agents sharing a mode share one relabelling.
std::vector<Batch> AssembleBatches(const comm::CommLayout& layout, const PolicySet& policies,
                                   const env::ChannelModel& channel,
                                   const MinibatchWindow& window,
                                   const std::vector<CorrectionMode>& modes,
                                   const RelabelOptions& options, nn::RngStream& rng);

// Diagnostic CSV of (original, relabelled) messages per sample and edge:
//   sample,edge,sender,receiver,original,relabelled
// Entries are the argmax of the sent block, -1 for an all-zero block.
void WriteMessagePairsCsv(std::ostream& out, const comm::CommLayout& layout,
                          const Batch& original, const Batch& relabelled);

}  // namespace commcorr::replay

#endif  // COMMCORR_REPLAY_RELABEL_H_
