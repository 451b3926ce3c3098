// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "grin/errors.hpp"

namespace grin::ad {

// Dense row-major 2-D tensor of 64-bit reals (vectors are 1 x n or n x 1).
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
  }
};

// Handle into a Tape.
struct Var {
  int id = -1;
};

// Eager tape-based reverse-mode autodiff. Single-threaded per tape.
class Tape {
 public:
  // Leaf node holding a copy of t. Gradients of leaves are readable after
  // backward() regardless of requires_grad; the flag only prunes traversal.
  Var input(const Tensor& t, bool requires_grad = false);

  Var matmul(Var a, Var b);
  // same shape, or b is a 1 x cols row broadcast over a's rows
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double s);
  Var relu(Var a);
  Var concat_cols(Var a, Var b);
  Var gather_rows(Var a, std::vector<int> rows);
  Var stack_rows(const std::vector<Var>& parts);

  // 1 x cols column-wise reductions over all rows
  Var rowwise_max_with_argmax(Var a);  // ties: lowest row index
  Var rowwise_sum(Var a);
  Var rowwise_mean(Var a);

  // per-group column-wise reduction; empty group -> zero row
  enum class Reduce { Max, Sum, Mean };
  Var segment_reduce(Var a, const std::vector<std::vector<int>>& groups,
                     Reduce mode);

  Var sum(Var a);      // scalar
  Var mean(Var a);     // scalar
  Var l1_norm(Var a);  // scalar; subgradient 0 at 0
  Var mse(Var pred, Var target);  // scalar mean squared error

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  const Tensor& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node.
  void backward(Var scalar_loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<int> parents;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  int push(Tensor value, std::vector<int> parents,
           std::function<void(Tape&)> backprop);
  Tensor& grad_buf(int id) { return nodes_[id].grad; }
  const Tensor& val(int id) const { return nodes_[id].value; }

  std::vector<Node> nodes_;
  int current_ = -1;  // node whose backprop closure is running
};

// Adam optimizer state over a flat parameter list.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr);

}  // namespace grin::ad
