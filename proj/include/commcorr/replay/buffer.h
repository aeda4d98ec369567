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

#ifndef COMMCORR_REPLAY_BUFFER_H_
#define COMMCORR_REPLAY_BUFFER_H_

#include <cstdint>
#include <vector>

#include "commcorr/comm/layout.h"
#include "commcorr/nn/checkpoint.h"
#include "commcorr/nn/rng.h"
#include "commcorr/nn/tape.h"

namespace commcorr::replay {

using nn::Matrix;
using nn::Vector;

// One joint time step. Observations and actions are stored as joint vectors
// (agents concatenated in index order); the layout says which columns are
// environment parts, communication slots, movement and message blocks.
struct ExperienceRecord {
  int64_t episode = 0;
  int step = 0;
  Vector obs;
  Vector action;
  std::vector<double> rewards;  // per agent; message reward is always 0
  Vector next_obs;
  bool terminal = false;
  double fingerprint = 0.0;
};

// Split view of a joint observation: per agent environment part, per edge slot.
struct ObservationSplit {
  std::vector<Vector> env;
  std::vector<Vector> slots;  // indexed by graph edge
};

// Split view of a joint action: per agent non-message part (movement plus
// continuous block), per sender message block.
struct ActionSplit {
  std::vector<Vector> movement;
  std::vector<Vector> continuous;
  std::vector<std::vector<Vector>> messages;  // [agent][block]
};

ObservationSplit SplitObservation(const comm::CommLayout& layout, const Vector& joint);
Vector JoinObservation(const comm::CommLayout& layout, const ObservationSplit& split);
ActionSplit SplitAction(const comm::CommLayout& layout, const Vector& joint);
Vector JoinAction(const comm::CommLayout& layout, const ActionSplit& split);

// Per-agent views inside joint vectors.
Vector AgentObs(const comm::CommLayout& layout, const Vector& joint_obs, int agent);
Vector AgentAction(const comm::CommLayout& layout, const Vector& joint_action, int agent);

// Columns of the joint observation that hold communication slots, and of the
// joint action that hold message blocks. Everything else is "environment".
std::vector<int> SlotColumns(const comm::CommLayout& layout);
std::vector<int> MessageColumns(const comm::CommLayout& layout);

// Sampled minibatch with K steps of history. Row b of obs[p] is o_{t-K+p}
// for sample b; obs[K] is o_t. Rows older than the clamped start
// (p < K - effective_length[b]) repeat the oldest available observation and
// are never read by the corrections.
struct MinibatchWindow {
  int K = 0;
  std::vector<int> effective_length;
  std::vector<int64_t> index;  // logical buffer index of o_t
  std::vector<Matrix> obs;     // K + 1 entries, B x joint_obs_dim
  Matrix action;               // a_t, B x joint_action_dim
  Matrix rewards;              // B x N
  Matrix next_obs;             // o_{t+1}
  Vector terminal;             // 1.0 at the final step of an episode
  Vector fingerprint;

  int batch_size() const { return static_cast<int>(effective_length.size()); }
};

// Episodic ring buffer. Records of one episode must be pushed consecutively
// starting at step 0; the oldest record is overwritten once full.
class ReplayBuffer {
 public:
  static constexpr int64_t kDefaultCapacity = 10'000'000;

  ReplayBuffer(const comm::CommLayout& layout, int64_t capacity = kDefaultCapacity);

  void Push(const ExperienceRecord& record);

  int64_t size() const { return size_; }
  int64_t capacity() const { return capacity_; }
  int64_t total_pushed() const { return total_pushed_; }
  int obs_dim() const { return obs_dim_; }
  int action_dim() const { return action_dim_; }
  int num_agents() const { return num_agents_; }

  // Logical index 0 is the oldest stored record.
  ExperienceRecord Get(int64_t logical) const;
  // Number of older records of the same episode still stored.
  int HistoryAvailable(int64_t logical) const;

  MinibatchWindow SampleWindow(nn::RngStream& rng, int batch_size, int K) const;
  MinibatchWindow WindowAt(const std::vector<int64_t>& logical, int K) const;

  // Checkpoint payload: u32 version, dims, capacity, counters, then every
  // stored record oldest first.
  void Write(nn::ByteWriter& w) const;
  static ReplayBuffer Read(const comm::CommLayout& layout, nn::ByteReader& r);

 private:
  int64_t Physical(int64_t logical) const;

  int obs_dim_;
  int action_dim_;
  int num_agents_;
  int64_t capacity_;
  int64_t size_ = 0;
  int64_t head_ = 0;  // next physical slot to write
  int64_t total_pushed_ = 0;
  bool has_last_ = false;
  int64_t last_episode_ = 0;
  int last_step_ = 0;

  std::vector<double> obs_;
  std::vector<double> next_obs_;
  std::vector<double> action_;
  std::vector<double> rewards_;
  std::vector<int64_t> episode_;
  std::vector<int> step_;
  std::vector<uint8_t> terminal_;
  std::vector<double> fingerprint_;
};

}  // namespace commcorr::replay

#endif  // COMMCORR_REPLAY_BUFFER_H_
