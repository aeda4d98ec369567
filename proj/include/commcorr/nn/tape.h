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

#ifndef COMMCORR_NN_TAPE_H_
#define COMMCORR_NN_TAPE_H_

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace commcorr::nn {

// Batch-first throughout: rows are samples, columns are features.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid as long as the
// tape is alive.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode recording. Nodes are appended in evaluation order, so reverse
// insertion order is a valid topological order for the backward pass.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  // Leaf whose gradient is added into *grad_sink when Backward runs.
  Var Parameter(Matrix value, Matrix* grad_sink);
  // Leaf whose gradient can be read back with Gradient().
  Var Input(Matrix value);

  // Runs the reverse pass from a 1x1 loss. A tape can be differentiated once.
  void Backward(Var loss);
  // Gradient of the last Backward() loss with respect to v; zeros if v did
  // not influence the loss.
  Matrix Gradient(Var v) const;

  bool backward_done() const { return backward_done_; }
  size_t size() const { return nodes_.size(); }

  // Used by op implementations.
  Var Record(Matrix value, std::vector<int> parents, BackwardFn backward);
  const Matrix& ValueOf(int id) const { return nodes_[id].value; }
  const Matrix& GradOf(int id) const { return nodes_[id].grad; }
  bool RequiresGrad(int id) const { return nodes_[id].requires_grad; }
  // Adds delta into the gradient of node id (no-op for constants).
  void Accumulate(int id, const Matrix& delta);
  template <typename Expr>
  void AccumulateExpr(int id, const Expr& delta) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (!n.grad_live) {
      n.grad = delta;
      n.grad_live = true;
    } else {
      n.grad += delta;
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool grad_live = false;
    std::vector<int> parents;
    BackwardFn backward;
    Matrix* grad_sink = nullptr;
  };

  Var Leaf(Matrix value, bool requires_grad, Matrix* grad_sink);

  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

// Differentiable operations. All operands must come from the same tape.
Var MatMulT(Var x, Var w);       // x * w^T; x: B x in, w: out x in
Var AddBias(Var x, Var bias);    // bias: out x 1, broadcast over rows
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);           // elementwise
Var Scale(Var x, double factor);
Var Relu(Var x);
Var Tanh(Var x);
Var Square(Var x);
Var Sum(Var x);                  // 1 x 1
Var Mean(Var x);                 // 1 x 1
Var ConcatCols(std::span<const Var> parts);
Var SliceCols(Var x, Eigen::Index begin, Eigen::Index count);
Var SoftmaxRows(Var x);
// Forward value is `hard`; the backward pass routes the incoming gradient
// unchanged to `soft`.
Var StraightThrough(const Matrix& hard, Var soft);

// Row-wise softmax without recording.
Matrix SoftmaxRows(const Matrix& x);

}  // namespace commcorr::nn

#endif  // COMMCORR_NN_TAPE_H_
