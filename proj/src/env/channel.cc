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

#include "commcorr/env/channel.h"

#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::env {

ChannelModel ChannelModel::Dropout(double p) {
  ChannelModel c;
  c.kind = Kind::kDropout;
  c.drop_p = p;
  c.Validate();
  return c;
}

ChannelModel ChannelModel::Gaussian(double sigma) {
  ChannelModel c;
  c.kind = Kind::kGaussian;
  c.sigma = sigma;
  c.Validate();
  return c;
}

void ChannelModel::Validate() const {
  if (!(drop_p >= 0.0 && drop_p <= 1.0)) {
    throw std::invalid_argument(fmt::format("channel: drop_p {} outside [0, 1]", drop_p));
  }
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument(fmt::format("channel: sigma {} is negative", sigma));
  }
}

std::string ChannelModel::Describe() const {
  switch (kind) {
    case Kind::kIdentity:
      return "identity";
    case Kind::kDropout:
      return fmt::format("dropout(p={})", drop_p);
    case Kind::kGaussian:
      return fmt::format("gaussian(sigma={})", sigma);
  }
  return "?";
}

Vector Transmit(const ChannelModel& channel, const Vector& message,
                int expected_dim, nn::RngStream& rng) {
  if (message.size() != expected_dim) {
    throw std::invalid_argument(fmt::format(
        "transmit: message has {} entries, edge carries {}", message.size(),
        expected_dim));
  }
  Matrix row = message.transpose();
  TransmitRows(channel, row, rng);
  return row.row(0).transpose();
}

void TransmitRows(const ChannelModel& channel, Eigen::Ref<Matrix> messages,
                  nn::RngStream& rng) {
  switch (channel.kind) {
    case ChannelModel::Kind::kIdentity:
      return;
    case ChannelModel::Kind::kDropout:
      for (Eigen::Index r = 0; r < messages.rows(); ++r) {
        if (rng.Bernoulli(channel.drop_p)) messages.row(r).setZero();
      }
      return;
    case ChannelModel::Kind::kGaussian:
      for (Eigen::Index r = 0; r < messages.rows(); ++r) {
        for (Eigen::Index c = 0; c < messages.cols(); ++c) {
          messages(r, c) += channel.sigma * rng.Normal();
        }
      }
      return;
  }
}

}  // namespace commcorr::env
