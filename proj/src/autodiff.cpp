// SPDX-License-Identifier: Apache-2.0
#include "grin/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grin::ad {

namespace {

[[noreturn]] void shape_fail(const std::string& op, const Tensor& a) {
  throw ShapeError(op + ": bad shape " + std::to_string(a.rows) + "x" +
                   std::to_string(a.cols));
}

[[noreturn]] void shape_fail2(const std::string& op, const Tensor& a,
                              const Tensor& b) {
  throw ShapeError(op + ": incompatible shapes " + std::to_string(a.rows) +
                   "x" + std::to_string(a.cols) + " and " +
                   std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

}  // namespace

int Tape::push(Tensor value, std::vector<int> parents,
               std::function<void(Tape&)> backprop) {
  Node n;
  n.grad = Tensor(value.rows, value.cols);
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backprop = std::move(backprop);
  for (int p : n.parents)
    if (nodes_[p].requires_grad) n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::input(const Tensor& t, bool requires_grad) {
  int id = push(t, {}, nullptr);
  nodes_[id].requires_grad = requires_grad;
  return {id};
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  if (A.cols != B.rows) shape_fail2("matmul", A, B);
  Tensor C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  int ai = a.id, bi = b.id;
  return {push(std::move(C), {ai, bi}, [ai, bi](Tape& t) {
    // dA = dC * B^T, dB = A^T * dC
    const Tensor& A = t.val(ai);
    const Tensor& B = t.val(bi);
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    Tensor& dB = t.grad_buf(bi);
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < B.cols; ++j) {
        double g = dC.at(i, j);
        if (g == 0.0) continue;
        for (int k = 0; k < A.cols; ++k) {
          dA.at(i, k) += g * B.at(k, j);
          dB.at(k, j) += g * A.at(i, k);
        }
      }
  })};
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  bool broadcast = B.rows == 1 && B.cols == A.cols && A.rows != 1;
  if (!A.same_shape(B) && !broadcast) shape_fail2("add", A, B);
  Tensor C = A;
  if (broadcast) {
    for (int i = 0; i < A.rows; ++i)
      for (int j = 0; j < A.cols; ++j) C.at(i, j) += B.at(0, j);
  } else {
    for (size_t i = 0; i < C.size(); ++i) C.data[i] += B.data[i];
  }
  int ai = a.id, bi = b.id;
  return {push(std::move(C), {ai, bi}, [ai, bi, broadcast](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    Tensor& dB = t.grad_buf(bi);
    for (size_t i = 0; i < dC.size(); ++i) dA.data[i] += dC.data[i];
    if (broadcast) {
      for (int i = 0; i < dC.rows; ++i)
        for (int j = 0; j < dC.cols; ++j) dB.at(0, j) += dC.at(i, j);
    } else {
      for (size_t i = 0; i < dC.size(); ++i) dB.data[i] += dC.data[i];
    }
  })};
}

Var Tape::sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var Tape::scale(Var a, double s) {
  Tensor C = val(a.id);
  for (double& x : C.data) x *= s;
  int ai = a.id;
  return {push(std::move(C), {ai}, [ai, s](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    for (size_t i = 0; i < dC.size(); ++i) dA.data[i] += s * dC.data[i];
  })};
}

Var Tape::relu(Var a) {
  Tensor C = val(a.id);
  for (double& x : C.data) x = std::max(0.0, x);
  int ai = a.id;
  return {push(std::move(C), {ai}, [ai](Tape& t) {
    const Tensor& A = t.val(ai);
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    for (size_t i = 0; i < dC.size(); ++i)
      if (A.data[i] > 0.0) dA.data[i] += dC.data[i];
  })};
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& A = val(a.id);
  const Tensor& B = val(b.id);
  if (A.rows != B.rows) shape_fail2("concat_cols", A, B);
  Tensor C(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) C.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) C.at(i, A.cols + j) = B.at(i, j);
  }
  int ai = a.id, bi = b.id;
  int ac = A.cols, bc = B.cols;
  return {push(std::move(C), {ai, bi}, [ai, bi, ac, bc](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    Tensor& dB = t.grad_buf(bi);
    for (int i = 0; i < dC.rows; ++i) {
      for (int j = 0; j < ac; ++j) dA.at(i, j) += dC.at(i, j);
      for (int j = 0; j < bc; ++j) dB.at(i, j) += dC.at(i, ac + j);
    }
  })};
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
  const Tensor& A = val(a.id);
  for (int r : rows)
    if (r < 0 || r >= A.rows) shape_fail("gather_rows", A);
  Tensor C(static_cast<int>(rows.size()), A.cols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < A.cols; ++j)
      C.at(static_cast<int>(i), j) = A.at(rows[i], j);
  int ai = a.id;
  return {push(std::move(C), {ai}, [ai, rows = std::move(rows)](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    for (size_t i = 0; i < rows.size(); ++i)
      for (int j = 0; j < dC.cols; ++j)
        dA.at(rows[i], j) += dC.at(static_cast<int>(i), j);
  })};
}

Var Tape::stack_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("stack_rows: empty part list");
  int cols = val(parts[0].id).cols;
  int rows = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    const Tensor& t = val(p.id);
    if (t.cols != cols) shape_fail("stack_rows", t);
    rows += t.rows;
    ids.push_back(p.id);
  }
  Tensor C(rows, cols);
  int r = 0;
  for (int id : ids) {
    const Tensor& t = val(id);
    for (int i = 0; i < t.rows; ++i, ++r)
      for (int j = 0; j < cols; ++j) C.at(r, j) = t.at(i, j);
  }
  return {push(std::move(C), ids, [ids](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    int r = 0;
    for (int id : ids) {
      Tensor& dP = t.grad_buf(id);
      for (int i = 0; i < dP.rows; ++i, ++r)
        for (int j = 0; j < dC.cols; ++j) dP.at(i, j) += dC.at(r, j);
    }
  })};
}

Var Tape::rowwise_max_with_argmax(Var a) {
  const Tensor& A = val(a.id);
  if (A.rows < 1) shape_fail("rowwise_max_with_argmax", A);
  Tensor C(1, A.cols);
  std::vector<int> argmax(A.cols, 0);
  for (int j = 0; j < A.cols; ++j) {
    double best = A.at(0, j);
    for (int i = 1; i < A.rows; ++i)
      if (A.at(i, j) > best) {  // strict: ties keep the lowest row index
        best = A.at(i, j);
        argmax[j] = i;
      }
    C.at(0, j) = best;
  }
  int ai = a.id;
  return {push(std::move(C), {ai}, [ai, argmax = std::move(argmax)](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    for (int j = 0; j < dC.cols; ++j) dA.at(argmax[j], j) += dC.at(0, j);
  })};
}

Var Tape::rowwise_sum(Var a) {
  const Tensor& A = val(a.id);
  Tensor C(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.at(0, j) += A.at(i, j);
  int ai = a.id;
  return {push(std::move(C), {ai}, [ai](Tape& t) {
    const Tensor& dC = t.grad_buf(t.current_);
    Tensor& dA = t.grad_buf(ai);
    for (int i = 0; i < dA.rows; ++i)
      for (int j = 0; j < dA.cols; ++j) dA.at(i, j) += dC.at(0, j);
  })};
}

Var Tape::rowwise_mean(Var a) {
  const Tensor& A = val(a.id);
  if (A.rows < 1) shape_fail("rowwise_mean", A);
  return scale(rowwise_sum(a), 1.0 / A.rows);
}

Var Tape::segment_reduce(Var a, const std::vector<std::vector<int>>& groups,
                         Reduce mode) {
  const Tensor& A = val(a.id);
  int n = static_cast<int>(groups.size());
  Tensor C(n, A.cols);
  std::vector<std::vector<int>> argmax;  // only for Max
  if (mode == Reduce::Max) argmax.assign(n, {});
  for (int g = 0; g < n; ++g) {
    const auto& rows = groups[g];
    for (int r : rows)
      if (r < 0 || r >= A.rows) shape_fail("segment_reduce", A);
    if (rows.empty()) continue;  // zero row: the deg-0 branch
    if (mode == Reduce::Max) {
      argmax[g].assign(A.cols, rows[0]);
      for (int j = 0; j < A.cols; ++j) {
        double best = A.at(rows[0], j);
        for (size_t i = 1; i < rows.size(); ++i)
          if (A.at(rows[i], j) > best) {
            best = A.at(rows[i], j);
            argmax[g][j] = rows[i];
          }
        C.at(g, j) = best;
      }
    } else {
      for (int r : rows)
        for (int j = 0; j < A.cols; ++j) C.at(g, j) += A.at(r, j);
      if (mode == Reduce::Mean)
        for (int j = 0; j < A.cols; ++j)
          C.at(g, j) /= static_cast<double>(rows.size());
    }
  }
  int ai = a.id;
  return {push(std::move(C), {ai},
               [ai, groups, mode, argmax = std::move(argmax)](Tape& t) {
                 const Tensor& dC = t.grad_buf(t.current_);
                 Tensor& dA = t.grad_buf(ai);
                 for (size_t g = 0; g < groups.size(); ++g) {
                   const auto& rows = groups[g];
                   if (rows.empty()) continue;
                   if (mode == Reduce::Max) {
                     for (int j = 0; j < dC.cols; ++j)
                       dA.at(argmax[g][j], j) += dC.at(static_cast<int>(g), j);
                   } else {
                     double f = mode == Reduce::Mean
                                    ? 1.0 / static_cast<double>(rows.size())
                                    : 1.0;
                     for (int r : rows)
                       for (int j = 0; j < dC.cols; ++j)
                         dA.at(r, j) += f * dC.at(static_cast<int>(g), j);
                   }
                 }
               })};
}

Var Tape::sum(Var a) {
  const Tensor& A = val(a.id);
  double s = 0.0;
  for (double x : A.data) s += x;
  int ai = a.id;
  return {push(Tensor::scalar(s), {ai}, [ai](Tape& t) {
    double g = t.grad_buf(t.current_).data[0];
    Tensor& dA = t.grad_buf(ai);
    for (double& x : dA.data) x += g;
  })};
}

Var Tape::mean(Var a) {
  const Tensor& A = val(a.id);
  if (A.size() == 0) shape_fail("mean", A);
  return scale(sum(a), 1.0 / static_cast<double>(A.size()));
}

Var Tape::l1_norm(Var a) {
  const Tensor& A = val(a.id);
  double s = 0.0;
  for (double x : A.data) s += std::abs(x);
  int ai = a.id;
  return {push(Tensor::scalar(s), {ai}, [ai](Tape& t) {
    double g = t.grad_buf(t.current_).data[0];
    const Tensor& A = t.val(ai);
    Tensor& dA = t.grad_buf(ai);
    for (size_t i = 0; i < A.size(); ++i) {
      // subgradient 0 at exactly 0
      if (A.data[i] > 0.0) dA.data[i] += g;
      if (A.data[i] < 0.0) dA.data[i] -= g;
    }
  })};
}

Var Tape::mse(Var pred, Var target) {
  const Tensor& P = val(pred.id);
  const Tensor& T = val(target.id);
  if (!P.same_shape(T)) shape_fail2("mse", P, T);
  Var d = sub(pred, target);
  // mean of squares
  const Tensor& D = val(d.id);
  double s = 0.0;
  for (double x : D.data) s += x * x;
  s /= static_cast<double>(D.size());
  int di = d.id;
  return {push(Tensor::scalar(s), {di}, [di](Tape& t) {
    double g = t.grad_buf(t.current_).data[0];
    const Tensor& D = t.val(di);
    Tensor& dD = t.grad_buf(di);
    double f = 2.0 * g / static_cast<double>(D.size());
    for (size_t i = 0; i < D.size(); ++i) dD.data[i] += f * D.data[i];
  })};
}

void Tape::backward(Var scalar_loss) {
  const Tensor& L = val(scalar_loss.id);
  if (L.rows != 1 || L.cols != 1)
    throw ShapeError("backward requires a scalar loss");
  for (Node& n : nodes_)
    std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
  nodes_[scalar_loss.id].grad.data[0] = 1.0;
  for (int id = scalar_loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backprop) continue;
    bool any = false;
    for (double g : n.grad.data)
      if (g != 0.0) {
        any = true;
        break;
      }
    if (!any) continue;
    current_ = id;
    n.backprop(*this);
  }
}

void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (Tensor* p : params) {
      state.m.emplace_back(p->rows, p->cols);
      state.v.emplace_back(p->rows, p->cols);
    }
  }
  ++state.step;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    if (!p.same_shape(g)) throw ShapeError("adam_step: shape mismatch");
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    for (size_t k = 0; k < p.size(); ++k) {
      m.data[k] = state.beta1 * m.data[k] + (1.0 - state.beta1) * g.data[k];
      v.data[k] =
          state.beta2 * v.data[k] + (1.0 - state.beta2) * g.data[k] * g.data[k];
      double mhat = m.data[k] / bc1;
      double vhat = v.data[k] / bc2;
      p.data[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace grin::ad
