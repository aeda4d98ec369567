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

#ifndef COMMCORR_NN_MLP_H_
#define COMMCORR_NN_MLP_H_

#include <string>
#include <vector>

#include "commcorr/nn/rng.h"
#include "commcorr/nn/tape.h"

namespace commcorr::nn {

enum class Activation { kRelu, kTanh };

std::string ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

struct Layer {
  Matrix weight;  // out x in
  Matrix bias;    // out x 1
};

// Feedforward network: affine layers with `activation` between them and an
// affine output. The same type stores gradients and Adam moments.
struct MLPParams {
  std::vector<int> layer_sizes;
  Activation activation = Activation::kRelu;
  std::vector<Layer> layers;

  // Uniform fan-in initialization in [-1/sqrt(in), 1/sqrt(in)].
  static MLPParams Init(std::vector<int> layer_sizes, RngStream& rng,
                        Activation activation = Activation::kRelu);
  static MLPParams Zeros(std::vector<int> layer_sizes,
                         Activation activation = Activation::kRelu);
  MLPParams ZerosLike() const { return Zeros(layer_sizes, activation); }

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  size_t NumParameters() const;
  bool SameArchitecture(const MLPParams& other) const;
  void SetZero();
  // Throws std::invalid_argument if weight shapes disagree with layer_sizes.
  void Validate() const;
};

// Hidden sizes default to the two 64-unit layers used for every network.
std::vector<int> MakeLayerSizes(int input, int output,
                                const std::vector<int>& hidden = {64, 64});

// Inference pass, nothing recorded. input: B x input_dim.
Matrix Forward(const MLPParams& params, const Matrix& input);

// Recorded pass. When `grads` is non-null, parameter gradients are added into
// it on Backward(); with a null sink the parameters are treated as constants.
Var Forward(Tape& tape, const MLPParams& params, MLPParams* grads, Var input);

}  // namespace commcorr::nn

#endif  // COMMCORR_NN_MLP_H_
