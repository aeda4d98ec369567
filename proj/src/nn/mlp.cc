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

#include "commcorr/nn/mlp.h"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace commcorr::nn {

std::string ActivationName(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation: " + name);
}

namespace {

void CheckLayerSizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("MLP needs at least input and output sizes");
  }
  for (int s : sizes) {
    if (s <= 0) {
      throw std::invalid_argument(
          fmt::format("MLP layer sizes must be positive: [{}]",
                      fmt::join(sizes, ", ")));
    }
  }
}

}  // namespace

MLPParams MLPParams::Init(std::vector<int> layer_sizes, RngStream& rng,
                          Activation activation) {
  MLPParams p = Zeros(std::move(layer_sizes), activation);
  for (Layer& layer : p.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        layer.weight(i, j) = rng.Uniform(-bound, bound);
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.rows(); ++i) {
      layer.bias(i, 0) = rng.Uniform(-bound, bound);
    }
  }
  return p;
}

MLPParams MLPParams::Zeros(std::vector<int> layer_sizes, Activation activation) {
  CheckLayerSizes(layer_sizes);
  MLPParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.activation = activation;
  for (size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    p.layers.push_back({Matrix::Zero(p.layer_sizes[l + 1], p.layer_sizes[l]),
                        Matrix::Zero(p.layer_sizes[l + 1], 1)});
  }
  return p;
}

size_t MLPParams::NumParameters() const {
  size_t n = 0;
  for (const Layer& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool MLPParams::SameArchitecture(const MLPParams& other) const {
  return layer_sizes == other.layer_sizes && activation == other.activation;
}

void MLPParams::SetZero() {
  for (Layer& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

void MLPParams::Validate() const {
  CheckLayerSizes(layer_sizes);
  if (layers.size() + 1 != layer_sizes.size()) {
    throw std::invalid_argument(fmt::format(
        "MLP has {} layers but layer_sizes [{}] implies {}", layers.size(),
        fmt::join(layer_sizes, ", "), layer_sizes.size() - 1));
  }
  for (size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    if (layer.weight.rows() != layer_sizes[l + 1] ||
        layer.weight.cols() != layer_sizes[l] ||
        layer.bias.rows() != layer_sizes[l + 1] || layer.bias.cols() != 1) {
      throw std::invalid_argument(fmt::format(
          "MLP layer {}: weight {}x{}, bias {}x{}; expected {}x{} and {}x1", l,
          layer.weight.rows(), layer.weight.cols(), layer.bias.rows(),
          layer.bias.cols(), layer_sizes[l + 1], layer_sizes[l],
          layer_sizes[l + 1]));
    }
  }
}

std::vector<int> MakeLayerSizes(int input, int output,
                                const std::vector<int>& hidden) {
  std::vector<int> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

namespace {

void CheckInput(const MLPParams& params, Eigen::Index cols) {
  if (cols != params.input_dim()) {
    throw std::invalid_argument(fmt::format(
        "MLP forward: input has {} features, network [{}] expects {}", cols,
        fmt::join(params.layer_sizes, ", "), params.input_dim()));
  }
}

}  // namespace

Matrix Forward(const MLPParams& params, const Matrix& input) {
  CheckInput(params, input.cols());
  Matrix h = input;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    Matrix z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.col(0).transpose();
    if (l + 1 < params.layers.size()) {
      if (params.activation == Activation::kRelu) {
        z = z.cwiseMax(0.0);
      } else {
        z = z.array().tanh().matrix();
      }
    }
    h = std::move(z);
  }
  return h;
}

Var Forward(Tape& tape, const MLPParams& params, MLPParams* grads, Var input) {
  CheckInput(params, input.cols());
  if (grads != nullptr && !grads->SameArchitecture(params)) {
    throw std::invalid_argument("MLP forward: gradient buffer architecture differs");
  }
  Var h = input;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    Var w = grads ? tape.Parameter(layer.weight, &grads->layers[l].weight)
                  : tape.Constant(layer.weight);
    Var b = grads ? tape.Parameter(layer.bias, &grads->layers[l].bias)
                  : tape.Constant(layer.bias);
    h = AddBias(MatMulT(h, w), b);
    if (l + 1 < params.layers.size()) {
      h = params.activation == Activation::kRelu ? Relu(h) : Tanh(h);
    }
  }
  return h;
}

}  // namespace commcorr::nn
