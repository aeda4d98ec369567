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

#ifndef COMMCORR_NN_OPTIM_H_
#define COMMCORR_NN_OPTIM_H_

#include <cstdint>

#include "commcorr/nn/mlp.h"

namespace commcorr::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  MLPParams first_moment;
  MLPParams second_moment;
  int64_t step = 0;

  static AdamState For(const MLPParams& params, AdamConfig config = {});
};

// Bias-corrected Adam update. Rejects non-finite gradients before touching
// params or state; the error names the offending layer.
void AdamStep(MLPParams& params, const MLPParams& grads, AdamState& state);

double GlobalNorm(const MLPParams& grads);
// Rescales grads so their global L2 norm is at most max_norm. Returns the norm
// before clipping.
double ClipGlobalNorm(MLPParams& grads, double max_norm);

// target <- tau * source + (1 - tau) * target, elementwise.
void SoftUpdate(MLPParams& target, const MLPParams& source, double tau);

}  // namespace commcorr::nn

#endif  // COMMCORR_NN_OPTIM_H_
