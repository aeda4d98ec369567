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

#include "commcorr/nn/optim.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::nn {

AdamState AdamState::For(const MLPParams& params, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.first_moment = params.ZerosLike();
  s.second_moment = params.ZerosLike();
  return s;
}

void AdamStep(MLPParams& params, const MLPParams& grads, AdamState& state) {
  if (!params.SameArchitecture(grads) ||
      !params.SameArchitecture(state.first_moment) ||
      !params.SameArchitecture(state.second_moment)) {
    throw std::invalid_argument("AdamStep: parameter/gradient/moment shapes differ");
  }
  for (size_t l = 0; l < grads.layers.size(); ++l) {
    if (!grads.layers[l].weight.allFinite() || !grads.layers[l].bias.allFinite()) {
      throw std::domain_error(
          fmt::format("AdamStep: non-finite gradient in layer {}", l));
    }
  }
  const AdamConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    p.array() -= c.lr * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + c.eps);
  };
  for (size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, grads.layers[l].weight,
           state.first_moment.layers[l].weight, state.second_moment.layers[l].weight);
    update(params.layers[l].bias, grads.layers[l].bias,
           state.first_moment.layers[l].bias, state.second_moment.layers[l].bias);
  }
}

double GlobalNorm(const MLPParams& grads) {
  double sq = 0.0;
  for (const Layer& l : grads.layers) {
    sq += l.weight.squaredNorm() + l.bias.squaredNorm();
  }
  return std::sqrt(sq);
}

double ClipGlobalNorm(MLPParams& grads, double max_norm) {
  const double norm = GlobalNorm(grads);
  if (std::isfinite(norm) && norm > max_norm) {
    const double s = max_norm / (norm + 1e-6);
    for (Layer& l : grads.layers) {
      l.weight *= s;
      l.bias *= s;
    }
  }
  return norm;
}

void SoftUpdate(MLPParams& target, const MLPParams& source, double tau) {
  if (!target.SameArchitecture(source)) {
    throw std::invalid_argument("SoftUpdate: architecture mismatch");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument(fmt::format("SoftUpdate: tau {} outside [0, 1]", tau));
  }
  for (size_t l = 0; l < target.layers.size(); ++l) {
    Layer& t = target.layers[l];
    const Layer& s = source.layers[l];
    t.weight = tau * s.weight + (1.0 - tau) * t.weight;
    t.bias = tau * s.bias + (1.0 - tau) * t.bias;
  }
}

}  // namespace commcorr::nn
