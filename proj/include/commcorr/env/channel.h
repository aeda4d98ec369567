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

#ifndef COMMCORR_ENV_CHANNEL_H_
#define COMMCORR_ENV_CHANNEL_H_

#include <string>

#include "commcorr/nn/rng.h"
#include "commcorr/nn/tape.h"

namespace commcorr::env {

using nn::Matrix;
using nn::Vector;

// Maps a sent message to what the receiver observes one step later.
struct ChannelModel {
  enum class Kind { kIdentity, kDropout, kGaussian };

  Kind kind = Kind::kIdentity;
  double drop_p = 0.0;  // kDropout: probability the receiver sees all zeros
  double sigma = 0.0;   // kGaussian: per-component noise standard deviation

  static ChannelModel Identity() { return {}; }
  static ChannelModel Dropout(double p);
  static ChannelModel Gaussian(double sigma);

  void Validate() const;
  std::string Describe() const;
};

// Single message. Throws if message.size() != expected_dim.
Vector Transmit(const ChannelModel& channel, const Vector& message,
                int expected_dim, nn::RngStream& rng);

// Applies the channel to every row of `messages` in place (row = one sample).
void TransmitRows(const ChannelModel& channel, Eigen::Ref<Matrix> messages,
                  nn::RngStream& rng);

}  // namespace commcorr::env

#endif  // COMMCORR_ENV_CHANNEL_H_
