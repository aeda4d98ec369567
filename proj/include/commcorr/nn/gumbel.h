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

#ifndef COMMCORR_NN_GUMBEL_H_
#define COMMCORR_NN_GUMBEL_H_

#include "commcorr/nn/rng.h"
#include "commcorr/nn/tape.h"

namespace commcorr::nn {

// One Gumbel-Softmax draw per row. `hard` rows are one-hot at
// argmax(logits + g); `soft` rows are softmax((logits + g) * beta).
struct GumbelSample {
  Matrix hard;
  Matrix soft;
};

// Uniform draws are clamped to [kGumbelClamp, 1 - kGumbelClamp] before the
// double log.
inline constexpr double kGumbelClamp = 1e-10;

Matrix SampleGumbelNoise(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

GumbelSample GumbelSoftmax(const Matrix& logits, double beta, RngStream& rng);
GumbelSample GumbelSoftmaxWithNoise(const Matrix& logits, const Matrix& noise,
                                    double beta);

// Straight-through estimator: forward value is the hard one-hot sample,
// gradients flow through the soft relaxation.
Var GumbelSoftmaxST(Var logits, double beta, RngStream& rng);

// One-hot of the row-wise argmax (lowest index wins ties).
Matrix OneHotArgmax(const Matrix& scores);

}  // namespace commcorr::nn

#endif  // COMMCORR_NN_GUMBEL_H_
