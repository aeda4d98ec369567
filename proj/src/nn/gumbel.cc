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

#include "commcorr/nn/gumbel.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::nn {

namespace {

void CheckBeta(double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument(
        fmt::format("Gumbel-Softmax: inverse temperature must be > 0, got {}", beta));
  }
}

}  // namespace

Matrix SampleGumbelNoise(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double u = std::clamp(rng.Uniform(), kGumbelClamp, 1.0 - kGumbelClamp);
      g(r, c) = -std::log(-std::log(u));
    }
  }
  return g;
}

Matrix OneHotArgmax(const Matrix& scores) {
  Matrix out = Matrix::Zero(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    scores.row(r).maxCoeff(&best);
    out(r, best) = 1.0;
  }
  return out;
}

GumbelSample GumbelSoftmaxWithNoise(const Matrix& logits, const Matrix& noise,
                                    double beta) {
  CheckBeta(beta);
  if (!logits.allFinite()) {
    throw std::invalid_argument("Gumbel-Softmax: non-finite logits");
  }
  const Matrix perturbed = logits + noise;
  return {OneHotArgmax(perturbed), SoftmaxRows(Matrix(beta * perturbed))};
}

GumbelSample GumbelSoftmax(const Matrix& logits, double beta, RngStream& rng) {
  CheckBeta(beta);
  return GumbelSoftmaxWithNoise(
      logits, SampleGumbelNoise(logits.rows(), logits.cols(), rng), beta);
}

Var GumbelSoftmaxST(Var logits, double beta, RngStream& rng) {
  CheckBeta(beta);
  Tape& tape = *logits.tape();
  const Matrix noise = SampleGumbelNoise(logits.rows(), logits.cols(), rng);
  const Matrix hard = OneHotArgmax(logits.value() + noise);
  Var soft = SoftmaxRows(Scale(Add(logits, tape.Constant(noise)), beta));
  return StraightThrough(hard, soft);
}

}  // namespace commcorr::nn
