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

#include "commcorr/nn/tape.h"

#include <stdexcept>

#include <fmt/format.h>

namespace commcorr::nn {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw std::logic_error("Var: uninitialized handle");
  return tape_->ValueOf(id_);
}

Var Tape::Leaf(Matrix value, bool requires_grad, Matrix* grad_sink) {
  if (backward_done_) {
    throw std::logic_error("Tape: cannot record after Backward()");
  }
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.grad_sink = grad_sink;
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Constant(Matrix value) { return Leaf(std::move(value), false, nullptr); }

Var Tape::Parameter(Matrix value, Matrix* grad_sink) {
  if (grad_sink != nullptr && (grad_sink->rows() != value.rows() ||
                               grad_sink->cols() != value.cols())) {
    throw std::invalid_argument(fmt::format(
        "Tape::Parameter: gradient sink is {}x{}, parameter is {}x{}",
        grad_sink->rows(), grad_sink->cols(), value.rows(), value.cols()));
  }
  return Leaf(std::move(value), true, grad_sink);
}

Var Tape::Input(Matrix value) { return Leaf(std::move(value), true, nullptr); }

Var Tape::Record(Matrix value, std::vector<int> parents, BackwardFn backward) {
  if (backward_done_) {
    throw std::logic_error("Tape: cannot record after Backward()");
  }
  bool requires_grad = false;
  for (int p : parents) requires_grad = requires_grad || nodes_[p].requires_grad;
  Node& n = nodes_.emplace_back();
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.parents = std::move(parents);
  if (requires_grad) n.backward = std::move(backward);
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::Accumulate(int id, const Matrix& delta) { AccumulateExpr(id, delta); }

void Tape::Backward(Var loss) {
  if (loss.tape() != this) throw std::invalid_argument("Backward: foreign Var");
  if (backward_done_) {
    throw std::logic_error(
        "Backward: this recording was already differentiated; run forward "
        "again on a fresh tape");
  }
  const Matrix& lv = ValueOf(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::invalid_argument(fmt::format(
        "Backward: loss must be 1x1, got {}x{}", lv.rows(), lv.cols()));
  }
  backward_done_ = true;
  Accumulate(loss.id(), Matrix::Ones(1, 1));
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad_live) continue;
    if (n.backward) n.backward(*this, id);
    if (n.grad_sink != nullptr) *n.grad_sink += n.grad;
  }
}

Matrix Tape::Gradient(Var v) const {
  const Node& n = nodes_[v.id()];
  if (!n.grad_live) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

namespace {

Tape& SameTape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw std::invalid_argument("autodiff: operands recorded on different tapes");
  }
  return *a.tape();
}

void CheckSameShape(const char* op, Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(fmt::format("{}: shape mismatch {}x{} vs {}x{}",
                                            op, a.rows(), a.cols(), b.rows(),
                                            b.cols()));
  }
}

}  // namespace

Var MatMulT(Var x, Var w) {
  Tape& t = SameTape(x, w);
  if (x.cols() != w.cols()) {
    throw std::invalid_argument(fmt::format(
        "MatMulT: input has {} columns but weight expects {} (weight {}x{})",
        x.cols(), w.cols(), w.rows(), w.cols()));
  }
  Matrix out = x.value() * w.value().transpose();
  const int xi = x.id(), wi = w.id();
  return t.Record(std::move(out), {xi, wi}, [xi, wi](Tape& tp, int self) {
    const Matrix& g = tp.GradOf(self);
    if (tp.RequiresGrad(xi)) tp.AccumulateExpr(xi, g * tp.ValueOf(wi));
    if (tp.RequiresGrad(wi)) {
      tp.AccumulateExpr(wi, g.transpose() * tp.ValueOf(xi));
    }
  });
}

Var AddBias(Var x, Var bias) {
  Tape& t = SameTape(x, bias);
  if (bias.cols() != 1 || bias.rows() != x.cols()) {
    throw std::invalid_argument(fmt::format(
        "AddBias: bias is {}x{}, expected {}x1", bias.rows(), bias.cols(),
        x.cols()));
  }
  Matrix out = x.value();
  out.rowwise() += bias.value().col(0).transpose();
  const int xi = x.id(), bi = bias.id();
  return t.Record(std::move(out), {xi, bi}, [xi, bi](Tape& tp, int self) {
    const Matrix& g = tp.GradOf(self);
    tp.AccumulateExpr(xi, g);
    if (tp.RequiresGrad(bi)) tp.AccumulateExpr(bi, g.colwise().sum().transpose());
  });
}

Var Add(Var a, Var b) {
  Tape& t = SameTape(a, b);
  CheckSameShape("Add", a, b);
  const int ai = a.id(), bi = b.id();
  return t.Record(a.value() + b.value(), {ai, bi}, [ai, bi](Tape& tp, int self) {
    tp.AccumulateExpr(ai, tp.GradOf(self));
    tp.AccumulateExpr(bi, tp.GradOf(self));
  });
}

Var Sub(Var a, Var b) {
  Tape& t = SameTape(a, b);
  CheckSameShape("Sub", a, b);
  const int ai = a.id(), bi = b.id();
  return t.Record(a.value() - b.value(), {ai, bi}, [ai, bi](Tape& tp, int self) {
    tp.AccumulateExpr(ai, tp.GradOf(self));
    tp.AccumulateExpr(bi, -tp.GradOf(self));
  });
}

Var Mul(Var a, Var b) {
  Tape& t = SameTape(a, b);
  CheckSameShape("Mul", a, b);
  const int ai = a.id(), bi = b.id();
  return t.Record(a.value().cwiseProduct(b.value()), {ai, bi},
                  [ai, bi](Tape& tp, int self) {
                    const Matrix& g = tp.GradOf(self);
                    tp.AccumulateExpr(ai, g.cwiseProduct(tp.ValueOf(bi)));
                    tp.AccumulateExpr(bi, g.cwiseProduct(tp.ValueOf(ai)));
                  });
}

Var Scale(Var x, double factor) {
  const int xi = x.id();
  return x.tape()->Record(factor * x.value(), {xi},
                          [xi, factor](Tape& tp, int self) {
                            tp.AccumulateExpr(xi, factor * tp.GradOf(self));
                          });
}

Var Relu(Var x) {
  const int xi = x.id();
  return x.tape()->Record(x.value().cwiseMax(0.0), {xi}, [xi](Tape& tp, int self) {
    const Matrix& in = tp.ValueOf(xi);
    tp.AccumulateExpr(
        xi, (in.array() > 0.0).select(tp.GradOf(self).array(), 0.0).matrix());
  });
}

Var Tanh(Var x) {
  const int xi = x.id();
  Matrix out = x.value().array().tanh().matrix();
  return x.tape()->Record(std::move(out), {xi}, [xi](Tape& tp, int self) {
    const Matrix& y = tp.ValueOf(self);
    tp.AccumulateExpr(
        xi, (tp.GradOf(self).array() * (1.0 - y.array().square())).matrix());
  });
}

Var Square(Var x) {
  const int xi = x.id();
  return x.tape()->Record(x.value().array().square().matrix(), {xi},
                          [xi](Tape& tp, int self) {
                            tp.AccumulateExpr(
                                xi, (2.0 * tp.ValueOf(xi).array() *
                                     tp.GradOf(self).array())
                                        .matrix());
                          });
}

Var Sum(Var x) {
  const int xi = x.id();
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return x.tape()->Record(std::move(out), {xi}, [xi](Tape& tp, int self) {
    const Matrix& in = tp.ValueOf(xi);
    tp.AccumulateExpr(xi, Matrix::Constant(in.rows(), in.cols(),
                                           tp.GradOf(self)(0, 0)));
  });
}

Var Mean(Var x) {
  const Eigen::Index n = x.value().size();
  if (n == 0) throw std::invalid_argument("Mean: empty input");
  return Scale(Sum(x), 1.0 / static_cast<double>(n));
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: no inputs");
  Tape& t = *parts.front().tape();
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw std::invalid_argument("ConcatCols: mixed tapes");
    if (p.rows() != rows) {
      throw std::invalid_argument(fmt::format(
          "ConcatCols: row mismatch {} vs {}", p.rows(), rows));
    }
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return t.Record(std::move(out), ids, [ids, widths](Tape& tp, int self) {
    const Matrix& g = tp.GradOf(self);
    Eigen::Index at = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (tp.RequiresGrad(ids[k]) && widths[k] > 0) {
        tp.AccumulateExpr(ids[k], g.middleCols(at, widths[k]));
      }
      at += widths[k];
    }
  });
}

Var SliceCols(Var x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > x.cols()) {
    throw std::invalid_argument(fmt::format(
        "SliceCols: [{}, {}) out of range for {} columns", begin, begin + count,
        x.cols()));
  }
  const int xi = x.id();
  const Eigen::Index total = x.cols();
  return x.tape()->Record(x.value().middleCols(begin, count), {xi},
                          [xi, begin, count, total](Tape& tp, int self) {
                            const Matrix& g = tp.GradOf(self);
                            Matrix full = Matrix::Zero(g.rows(), total);
                            full.middleCols(begin, count) = g;
                            tp.AccumulateExpr(xi, full);
                          });
}

Matrix SoftmaxRows(const Matrix& x) {
  Matrix out = x;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Var SoftmaxRows(Var x) {
  const int xi = x.id();
  return x.tape()->Record(SoftmaxRows(x.value()), {xi}, [xi](Tape& tp, int self) {
    const Matrix& y = tp.ValueOf(self);
    const Matrix& g = tp.GradOf(self);
    // dx = y * (g - sum(g * y))
    const Vector dot = (g.cwiseProduct(y)).rowwise().sum();
    Matrix dx = y.cwiseProduct(g - dot.replicate(1, g.cols()));
    tp.AccumulateExpr(xi, dx);
  });
}

Var StraightThrough(const Matrix& hard, Var soft) {
  if (hard.rows() != soft.rows() || hard.cols() != soft.cols()) {
    throw std::invalid_argument("StraightThrough: hard/soft shape mismatch");
  }
  const int si = soft.id();
  return soft.tape()->Record(hard, {si}, [si](Tape& tp, int self) {
    tp.AccumulateExpr(si, tp.GradOf(self));
  });
}

}  // namespace commcorr::nn
