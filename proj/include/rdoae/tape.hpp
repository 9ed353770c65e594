// Copyright 2026 The rdoae Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape records every primitive applied to its variables together with a
// closure that pushes the upstream gradient back to the operands. Calling
// backward() on a 1 x 1 node replays the closures in reverse creation order,
// which is a valid topological order because operands always precede their
// results.

#ifndef RDOAE_TAPE_HPP_
#define RDOAE_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rdoae/tensor.hpp"

namespace rdoae {

class Tape;

// Lightweight handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives a gradient.
  Var constant(Tensor value);
  // Leaf that receives a gradient; read it back with grad() after backward.
  Var input(Tensor value);
  // Leaf bound to a named parameter. Repeated calls for the same name return
  // the same node, so gradients from every use accumulate in one place.
  Var param(const ParamStore& store, const std::string& name);

  // Records a derived node. `backward` may be empty for non-differentiable
  // results; it is only invoked when the node received a gradient.
  Var push(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Upstream gradient of a node during backward (same shape as its value).
  const Tensor& upstream(std::size_t id) const { return nodes_[id].grad; }
  // Adds `g` into the gradient buffer of node `id` (no-op for constants).
  void accumulate(std::size_t id, const Tensor& g);
  // Adds `scale * g` in place; avoids a temporary for the common case.
  void accumulate_scaled(std::size_t id, const Tensor& g, double scale);

  // Runs reverse accumulation from a scalar (1 x 1) node. Returns gradients
  // for every parameter leaf that was bound on this tape. When `store` is
  // given, parameters of the store that were never touched get zeros.
  GradMap backward(Var loss, const ParamStore* store = nullptr);

  // Gradient of the last backward() pass with respect to any leaf.
  Tensor grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> param_nodes_;
};

// Element-wise activations available to network layers.
enum class Activation { kNone, kTanh, kSoftplus, kSigmoid, kSoftmax };

Activation parse_activation(const std::string& name);
std::string activation_name(Activation act);

namespace ad {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
// Broadcast a 1 x n row over every row of `a`.
Var add_row(Var a, Var row);
Var sub_row(Var a, Var row);
// Broadcast an m x 1 column over every column of `a`.
Var mul_col(Var a, Var col);
Var div_col(Var a, Var col);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
// Multiply / divide every entry by a 1 x 1 variable.
Var mul_scalar_var(Var a, Var s);
Var div_scalar_var(Var a, Var s);
// Every entry of `a` plus the 1 x 1 variable `s`.
Var add_scalar_var(Var a, Var s);
Var neg(Var a);

Var tanh(Var a);
Var softplus(Var a);
Var sigmoid(Var a);
Var softmax_rows(Var a);
Var log(Var a);
Var exp(Var a);
Var square(Var a);
Var sqrt(Var a);
Var reciprocal(Var a);
Var activate(Var a, Activation act);
// Values outside [lo, hi] are clamped and pass no gradient.
Var clamp(Var a, double lo, double hi);
// Element-wise product with a constant mask (dropout).
Var mask_mul(Var a, const Tensor& mask);

Var sum_all(Var a);
Var mean_all(Var a);
// m x n -> m x 1.
Var sum_rows(Var a);
// m x n -> 1 x n.
Var sum_cols(Var a);
// m x n -> m x 1, overflow-free.
Var logsumexp_rows(Var a);

Var col_slice(Var a, std::size_t start, std::size_t count);
Var concat_cols(const std::vector<Var>& parts);
// n x n -> 1 x n.
Var diag(Var a);

// For symmetric positive definite S (F x F) and rows d_l of D (L x F):
// q_l = d_l^T S^{-1} d_l, computed through a Cholesky factorization.
Var quad_form_spd(Var s, Var d);
// log det S for symmetric positive definite S, via Cholesky.
Var logdet_spd(Var s);

// sigmoid(upper) - sigmoid(lower) element-wise, evaluated on the side of
// the logistic curve where it does not cancel.
Var logistic_bin_mass(Var upper, Var lower);

}  // namespace ad

}  // namespace rdoae

#endif  // RDOAE_TAPE_HPP_
