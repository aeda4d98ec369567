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

#include "commcorr/replay/buffer.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::replay {

namespace {

constexpr uint32_t kBufferPayloadVersion = 1;

void CheckDim(const char* what, Eigen::Index got, int want) {
  if (got != want) {
    throw std::invalid_argument(
        fmt::format("experience record: {} has {} entries, layout expects {}", what, got, want));
  }
}

void CopyIn(std::vector<double>& store, int64_t row, int width, const double* src) {
  const size_t at = static_cast<size_t>(row) * width;
  if (store.size() < at + width) store.resize(at + width);
  std::copy(src, src + width, store.begin() + at);
}

Eigen::Map<const Vector> RowOf(const std::vector<double>& store, int64_t row, int width) {
  return Eigen::Map<const Vector>(store.data() + static_cast<size_t>(row) * width, width);
}

}  // namespace

ObservationSplit SplitObservation(const comm::CommLayout& layout, const Vector& joint) {
  CheckDim("joint observation", joint.size(), layout.joint_obs_dim());
  ObservationSplit split;
  split.env.resize(layout.num_agents());
  split.slots.resize(layout.graph().num_edges());
  for (int i = 0; i < layout.num_agents(); ++i) {
    const int base = layout.obs_offset(i);
    split.env[i] = joint.segment(base, layout.obs(i).env_dim);
    for (const comm::CommSlot& s : layout.obs(i).slots) {
      split.slots[s.edge] = joint.segment(base + s.offset, s.dim);
    }
  }
  return split;
}

Vector JoinObservation(const comm::CommLayout& layout, const ObservationSplit& split) {
  Vector joint(layout.joint_obs_dim());
  for (int i = 0; i < layout.num_agents(); ++i) {
    const int base = layout.obs_offset(i);
    joint.segment(base, layout.obs(i).env_dim) = split.env.at(i);
    for (const comm::CommSlot& s : layout.obs(i).slots) {
      joint.segment(base + s.offset, s.dim) = split.slots.at(s.edge);
    }
  }
  return joint;
}

ActionSplit SplitAction(const comm::CommLayout& layout, const Vector& joint) {
  CheckDim("joint action", joint.size(), layout.joint_action_dim());
  ActionSplit split;
  const int n = layout.num_agents();
  split.movement.resize(n);
  split.continuous.resize(n);
  split.messages.resize(n);
  for (int i = 0; i < n; ++i) {
    const comm::ActionLayout& al = layout.action(i);
    const int base = layout.action_offset(i);
    split.movement[i] = joint.segment(base, al.movement_dim);
    split.continuous[i] = joint.segment(base + al.continuous_offset, al.continuous_dim);
    for (const comm::MessageBlock& b : al.messages) {
      split.messages[i].push_back(joint.segment(base + b.offset, b.dim));
    }
  }
  return split;
}

Vector JoinAction(const comm::CommLayout& layout, const ActionSplit& split) {
  Vector joint(layout.joint_action_dim());
  for (int i = 0; i < layout.num_agents(); ++i) {
    const comm::ActionLayout& al = layout.action(i);
    const int base = layout.action_offset(i);
    joint.segment(base, al.movement_dim) = split.movement.at(i);
    joint.segment(base + al.continuous_offset, al.continuous_dim) = split.continuous.at(i);
    for (size_t k = 0; k < al.messages.size(); ++k) {
      joint.segment(base + al.messages[k].offset, al.messages[k].dim) = split.messages.at(i).at(k);
    }
  }
  return joint;
}

Vector AgentObs(const comm::CommLayout& layout, const Vector& joint_obs, int agent) {
  return joint_obs.segment(layout.obs_offset(agent), layout.obs(agent).total_dim());
}

Vector AgentAction(const comm::CommLayout& layout, const Vector& joint_action, int agent) {
  return joint_action.segment(layout.action_offset(agent), layout.action(agent).total_dim());
}

std::vector<int> SlotColumns(const comm::CommLayout& layout) {
  std::vector<int> cols;
  for (int e = 0; e < layout.graph().num_edges(); ++e) {
    for (int c = 0; c < layout.graph().edge(e).dim; ++c) {
      cols.push_back(layout.joint_slot_offset(e) + c);
    }
  }
  return cols;
}

std::vector<int> MessageColumns(const comm::CommLayout& layout) {
  std::vector<int> cols;
  for (int i = 0; i < layout.num_agents(); ++i) {
    for (const comm::MessageBlock& b : layout.action(i).messages) {
      for (int c = 0; c < b.dim; ++c) cols.push_back(layout.action_offset(i) + b.offset + c);
    }
  }
  return cols;
}

ReplayBuffer::ReplayBuffer(const comm::CommLayout& layout, int64_t capacity)
    : obs_dim_(layout.joint_obs_dim()),
      action_dim_(layout.joint_action_dim()),
      num_agents_(layout.num_agents()),
      capacity_(capacity) {
  if (capacity <= 0) {
    throw std::invalid_argument(fmt::format("replay capacity {} must be positive", capacity));
  }
}

int64_t ReplayBuffer::Physical(int64_t logical) const {
  if (logical < 0 || logical >= size_) {
    throw std::out_of_range(fmt::format("replay index {} outside [0, {})", logical, size_));
  }
  const int64_t start = size_ < capacity_ ? 0 : head_;
  return (start + logical) % capacity_;
}

void ReplayBuffer::Push(const ExperienceRecord& r) {
  CheckDim("obs", r.obs.size(), obs_dim_);
  CheckDim("next_obs", r.next_obs.size(), obs_dim_);
  CheckDim("action", r.action.size(), action_dim_);
  CheckDim("rewards", static_cast<Eigen::Index>(r.rewards.size()), num_agents_);
  if (r.step < 0) throw std::invalid_argument("experience record: negative step");
  if (r.step > 0) {
    if (!has_last_ || last_episode_ != r.episode || last_step_ != r.step - 1) {
      throw std::invalid_argument(fmt::format(
          "experience record: episode {} step {} does not follow the previous record", r.episode,
          r.step));
    }
  }
  if (!r.obs.allFinite() || !r.next_obs.allFinite() || !r.action.allFinite()) {
    throw std::invalid_argument("experience record: non-finite entries");
  }

  const int64_t row = head_;
  CopyIn(obs_, row, obs_dim_, r.obs.data());
  CopyIn(next_obs_, row, obs_dim_, r.next_obs.data());
  CopyIn(action_, row, action_dim_, r.action.data());
  CopyIn(rewards_, row, num_agents_, r.rewards.data());
  if (static_cast<int64_t>(episode_.size()) <= row) {
    episode_.resize(row + 1);
    step_.resize(row + 1);
    terminal_.resize(row + 1);
    fingerprint_.resize(row + 1);
  }
  episode_[row] = r.episode;
  step_[row] = r.step;
  terminal_[row] = r.terminal ? 1 : 0;
  fingerprint_[row] = r.fingerprint;

  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
  ++total_pushed_;
  has_last_ = true;
  last_episode_ = r.episode;
  last_step_ = r.step;
}

ExperienceRecord ReplayBuffer::Get(int64_t logical) const {
  const int64_t p = Physical(logical);
  ExperienceRecord r;
  r.episode = episode_[p];
  r.step = step_[p];
  r.obs = RowOf(obs_, p, obs_dim_);
  r.next_obs = RowOf(next_obs_, p, obs_dim_);
  r.action = RowOf(action_, p, action_dim_);
  const auto rew = RowOf(rewards_, p, num_agents_);
  r.rewards.assign(rew.data(), rew.data() + num_agents_);
  r.terminal = terminal_[p] != 0;
  r.fingerprint = fingerprint_[p];
  return r;
}

int ReplayBuffer::HistoryAvailable(int64_t logical) const {
  const int64_t p = Physical(logical);
  return static_cast<int>(std::min<int64_t>(step_[p], logical));
}

MinibatchWindow ReplayBuffer::SampleWindow(nn::RngStream& rng, int batch_size, int K) const {
  if (size_ == 0) throw std::logic_error("sample_window: buffer is empty");
  if (batch_size <= 0) throw std::invalid_argument("sample_window: batch size must be positive");
  std::vector<int64_t> idx(batch_size);
  for (auto& j : idx) j = rng.UniformInt(static_cast<int>(size_));
  return WindowAt(idx, K);
}

MinibatchWindow ReplayBuffer::WindowAt(const std::vector<int64_t>& logical, int K) const {
  if (K < 0) throw std::invalid_argument(fmt::format("sample_window: K = {} is negative", K));
  const int B = static_cast<int>(logical.size());
  MinibatchWindow w;
  w.K = K;
  w.index = logical;
  w.effective_length.resize(B);
  w.obs.assign(K + 1, Matrix(B, obs_dim_));
  w.action.resize(B, action_dim_);
  w.rewards.resize(B, num_agents_);
  w.next_obs.resize(B, obs_dim_);
  w.terminal.resize(B);
  w.fingerprint.resize(B);
  for (int b = 0; b < B; ++b) {
    const int64_t j = logical[b];
    const int64_t p = Physical(j);
    const int L = std::min(K, HistoryAvailable(j));
    w.effective_length[b] = L;
    for (int q = 0; q <= K; ++q) {
      const int c = std::min(K - q, L);
      w.obs[q].row(b) = RowOf(obs_, Physical(j - c), obs_dim_).transpose();
    }
    w.action.row(b) = RowOf(action_, p, action_dim_).transpose();
    w.rewards.row(b) = RowOf(rewards_, p, num_agents_).transpose();
    w.next_obs.row(b) = RowOf(next_obs_, p, obs_dim_).transpose();
    w.terminal(b) = terminal_[p] ? 1.0 : 0.0;
    w.fingerprint(b) = fingerprint_[p];
  }
  return w;
}

void ReplayBuffer::Write(nn::ByteWriter& w) const {
  w.U32(kBufferPayloadVersion);
  w.U32(static_cast<uint32_t>(obs_dim_));
  w.U32(static_cast<uint32_t>(action_dim_));
  w.U32(static_cast<uint32_t>(num_agents_));
  w.I64(capacity_);
  w.I64(total_pushed_);
  w.I64(size_);
  w.U32(has_last_ ? 1 : 0);
  w.I64(last_episode_);
  w.I64(last_step_);
  for (int64_t j = 0; j < size_; ++j) {
    const int64_t p = Physical(j);
    w.I64(episode_[p]);
    w.I64(step_[p]);
    w.U32(terminal_[p]);
    w.F64(fingerprint_[p]);
    w.F64s({obs_.data() + p * obs_dim_, static_cast<size_t>(obs_dim_)});
    w.F64s({next_obs_.data() + p * obs_dim_, static_cast<size_t>(obs_dim_)});
    w.F64s({action_.data() + p * action_dim_, static_cast<size_t>(action_dim_)});
    w.F64s({rewards_.data() + p * num_agents_, static_cast<size_t>(num_agents_)});
  }
}

ReplayBuffer ReplayBuffer::Read(const comm::CommLayout& layout, nn::ByteReader& r) {
  if (r.U32() != kBufferPayloadVersion) throw std::runtime_error("replay payload: bad version");
  const int obs_dim = static_cast<int>(r.U32());
  const int action_dim = static_cast<int>(r.U32());
  const int agents = static_cast<int>(r.U32());
  if (obs_dim != layout.joint_obs_dim() || action_dim != layout.joint_action_dim() ||
      agents != layout.num_agents()) {
    throw std::runtime_error("replay payload: dimensions do not match the scenario layout");
  }
  ReplayBuffer buf(layout, r.I64());
  const int64_t total = r.I64();
  const int64_t size = r.I64();
  const bool has_last = r.U32() != 0;
  const int64_t last_episode = r.I64();
  const int last_step = static_cast<int>(r.I64());
  auto read_vec = [&](int want) {
    std::vector<double> v = r.F64s();
    if (static_cast<int>(v.size()) != want) throw std::runtime_error("replay payload: bad row");
    return v;
  };
  for (int64_t j = 0; j < size; ++j) {
    const int64_t row = j;
    buf.episode_.push_back(r.I64());
    buf.step_.push_back(static_cast<int>(r.I64()));
    buf.terminal_.push_back(static_cast<uint8_t>(r.U32()));
    buf.fingerprint_.push_back(r.F64());
    CopyIn(buf.obs_, row, obs_dim, read_vec(obs_dim).data());
    CopyIn(buf.next_obs_, row, obs_dim, read_vec(obs_dim).data());
    CopyIn(buf.action_, row, action_dim, read_vec(action_dim).data());
    CopyIn(buf.rewards_, row, agents, read_vec(agents).data());
  }
  buf.size_ = size;
  buf.head_ = size % buf.capacity_;
  buf.total_pushed_ = total;
  buf.has_last_ = has_last;
  buf.last_episode_ = last_episode;
  buf.last_step_ = last_step;
  return buf;
}

}  // namespace commcorr::replay
