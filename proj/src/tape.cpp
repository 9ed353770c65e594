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

#include "rdoae/tape.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "eigen_view.hpp"
#include "rdoae/error.hpp"

namespace rdoae {

using detail::view;

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::input(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(const ParamStore& store, const std::string& name) {
  auto it = param_nodes_.find(name);
  if (it != param_nodes_.end()) return Var{this, it->second};
  Var v = input(store.get(name));
  param_nodes_.emplace(name, v.id);
  return v;
}

Var Tape::push(Tensor value, std::vector<std::size_t> parents,
               BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (std::size_t p : parents) {
    if (nodes_[p].requires_grad) node.requires_grad = true;
  }
  node.parents = std::move(parents);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  accumulate_scaled(id, g, 1.0);
}

void Tape::accumulate_scaled(std::size_t id, const Tensor& g, double scale) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  if (!node.has_grad) {
    node.grad = g;
    if (scale != 1.0) {
      for (double& v : node.grad.values()) v *= scale;
    }
    node.has_grad = true;
    return;
  }
  auto dst = node.grad.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

GradMap Tape::backward(Var loss, const ParamStore* store) {
  if (loss.tape != this) throw ShapeError("backward: loss is on another tape");
  if (value(loss.id).size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_string(value(loss.id).shape()));
  }
  for (auto& node : nodes_) {
    node.has_grad = false;
    node.grad = Tensor();
  }
  if (nodes_[loss.id].requires_grad) {
    nodes_[loss.id].grad = Tensor(value(loss.id).shape(), 1.0);
    nodes_[loss.id].has_grad = true;
  }
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    node.backward(*this, i);
  }

  GradMap grads;
  for (const auto& [name, id] : param_nodes_) {
    const Node& node = nodes_[id];
    grads.emplace(name, node.has_grad ? node.grad
                                      : Tensor(node.value.shape(), 0.0));
  }
  if (store != nullptr) {
    for (const auto& name : store->names()) {
      if (!grads.count(name)) {
        grads.emplace(name, Tensor(store->get(name).shape(), 0.0));
      }
    }
  }
  return grads;
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.id];
  if (node.has_grad) return node.grad;
  return Tensor(node.value.shape(), 0.0);
}

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
}

Activation parse_activation(const std::string& name) {
  if (name == "none" || name == "linear") return Activation::kNone;
  if (name == "tanh") return Activation::kTanh;
  if (name == "softplus") return Activation::kSoftplus;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softmax") return Activation::kSoftmax;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kNone:
      return "none";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSoftplus:
      return "softplus";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "none";
}

namespace ad {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape != b.tape) {
    throw ShapeError(std::string(op) + ": operands live on different tapes");
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

template <typename F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out = Tensor::matrix(a.rows(), a.cols());
  auto src = a.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

// Unary element-wise op whose local derivative is a function of the input x
// and the output y.
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tape& tape = *a.tape;
  Tensor out = map_values(a.value(), fwd);
  const std::size_t aid = a.id;
  return tape.push(std::move(out), {aid},
                   [aid, deriv](Tape& t, std::size_t self) {
                     const Tensor& g = t.upstream(self);
                     const Tensor& x = t.value(aid);
                     const Tensor& y = t.value(self);
                     Tensor da = Tensor::matrix(x.rows(), x.cols());
                     for (std::size_t i = 0; i < da.size(); ++i) {
                       da[i] = g[i] * deriv(x[i], y[i]);
                     }
                     t.accumulate(aid, da);
                   });
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: " + shape_string(av.shape()) + " x " +
                     shape_string(bv.shape()));
  }
  Tensor out = Tensor::matrix(av.rows(), bv.cols());
  view(out).noalias() = view(av) * view(bv);
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->push(std::move(out), {aid, bid},
                      [aid, bid](Tape& t, std::size_t self) {
                        const Tensor& g = t.upstream(self);
                        if (t.requires_grad(aid)) {
                          const Tensor& bv = t.value(bid);
                          Tensor da = Tensor::matrix(g.rows(), bv.rows());
                          view(da).noalias() = view(g) * view(bv).transpose();
                          t.accumulate(aid, da);
                        }
                        if (t.requires_grad(bid)) {
                          const Tensor& av = t.value(aid);
                          Tensor db = Tensor::matrix(av.cols(), g.cols());
                          view(db).noalias() = view(av).transpose() * view(g);
                          t.accumulate(bid, db);
                        }
                      });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(av.cols(), av.rows());
  view(out) = view(av).transpose();
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    Tensor da = Tensor::matrix(g.cols(), g.rows());
    view(da) = view(g).transpose();
    t.accumulate(aid, da);
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  view(out) += view(b.value());
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->push(std::move(out), {aid, bid},
                      [aid, bid](Tape& t, std::size_t self) {
                        t.accumulate(aid, t.upstream(self));
                        t.accumulate(bid, t.upstream(self));
                      });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  view(out) -= view(b.value());
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->push(std::move(out), {aid, bid},
                      [aid, bid](Tape& t, std::size_t self) {
                        t.accumulate(aid, t.upstream(self));
                        t.accumulate_scaled(bid, t.upstream(self), -1.0);
                      });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  view(out).array() *= view(b.value()).array();
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->push(
      std::move(out), {aid, bid}, [aid, bid](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        if (t.requires_grad(aid)) {
          Tensor da = g;
          view(da).array() *= view(t.value(bid)).array();
          t.accumulate(aid, da);
        }
        if (t.requires_grad(bid)) {
          Tensor db = g;
          view(db).array() *= view(t.value(aid)).array();
          t.accumulate(bid, db);
        }
      });
}

Var div(Var a, Var b) {
  require_same_tape(a, b, "div");
  require_same_shape(a.value(), b.value(), "div");
  Tensor out = a.value();
  view(out).array() /= view(b.value()).array();
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->push(
      std::move(out), {aid, bid}, [aid, bid](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        const Tensor& bv = t.value(bid);
        if (t.requires_grad(aid)) {
          Tensor da = g;
          view(da).array() /= view(bv).array();
          t.accumulate(aid, da);
        }
        if (t.requires_grad(bid)) {
          const Tensor& y = t.value(self);
          Tensor db = g;
          view(db).array() *= -view(y).array() / view(bv).array();
          t.accumulate(bid, db);
        }
      });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row, "add_row");
  const Tensor& av = a.value();
  const Tensor& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw ShapeError("add_row: row " + shape_string(rv.shape()) +
                     " does not broadcast over " + shape_string(av.shape()));
  }
  Tensor out = av;
  view(out).rowwise() += view(rv).row(0);
  const std::size_t aid = a.id, rid = row.id;
  return a.tape->push(std::move(out), {aid, rid},
                      [aid, rid](Tape& t, std::size_t self) {
                        const Tensor& g = t.upstream(self);
                        t.accumulate(aid, g);
                        if (t.requires_grad(rid)) {
                          Tensor dr = Tensor::matrix(1, g.cols());
                          view(dr) = view(g).colwise().sum();
                          t.accumulate(rid, dr);
                        }
                      });
}

Var sub_row(Var a, Var row) {
  return add_row(a, neg(row));
}

Var mul_col(Var a, Var col) {
  require_same_tape(a, col, "mul_col");
  const Tensor& av = a.value();
  const Tensor& cv = col.value();
  if (cv.cols() != 1 || cv.rows() != av.rows()) {
    throw ShapeError("mul_col: column " + shape_string(cv.shape()) +
                     " does not broadcast over " + shape_string(av.shape()));
  }
  Tensor out = av;
  view(out).array().colwise() *= view(cv).col(0).array();
  const std::size_t aid = a.id, cid = col.id;
  return a.tape->push(
      std::move(out), {aid, cid}, [aid, cid](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        if (t.requires_grad(aid)) {
          Tensor da = g;
          view(da).array().colwise() *= view(t.value(cid)).col(0).array();
          t.accumulate(aid, da);
        }
        if (t.requires_grad(cid)) {
          Tensor dc = Tensor::matrix(g.rows(), 1);
          view(dc) = (view(g).array() * view(t.value(aid)).array())
                         .rowwise()
                         .sum()
                         .matrix();
          t.accumulate(cid, dc);
        }
      });
}

Var div_col(Var a, Var col) { return mul_col(a, reciprocal(col)); }

Var scale(Var a, double c) {
  Tensor out = a.value();
  view(out) *= c;
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid},
                      [aid, c](Tape& t, std::size_t self) {
                        t.accumulate_scaled(aid, t.upstream(self), c);
                      });
}

Var add_scalar(Var a, double c) {
  Tensor out = a.value();
  view(out).array() += c;
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    t.accumulate(aid, t.upstream(self));
  });
}

Var mul_scalar_var(Var a, Var s) {
  require_same_tape(a, s, "mul_scalar_var");
  const double sv = s.value().item();
  Tensor out = a.value();
  view(out) *= sv;
  const std::size_t aid = a.id, sid = s.id;
  return a.tape->push(std::move(out), {aid, sid},
                      [aid, sid](Tape& t, std::size_t self) {
                        const Tensor& g = t.upstream(self);
                        t.accumulate_scaled(aid, g, t.value(sid).item());
                        if (t.requires_grad(sid)) {
                          const double ds =
                              (view(g).array() * view(t.value(aid)).array())
                                  .sum();
                          t.accumulate(sid, Tensor::scalar(ds));
                        }
                      });
}

Var div_scalar_var(Var a, Var s) {
  return mul_scalar_var(a, reciprocal(s));
}

Var add_scalar_var(Var a, Var s) {
  require_same_tape(a, s, "add_scalar_var");
  const double sv = s.value().item();
  Tensor out = a.value();
  view(out).array() += sv;
  const std::size_t aid = a.id, sid = s.id;
  return a.tape->push(std::move(out), {aid, sid},
                      [aid, sid](Tape& t, std::size_t self) {
                        const Tensor& g = t.upstream(self);
                        t.accumulate(aid, g);
                        if (t.requires_grad(sid)) {
                          t.accumulate(sid, Tensor::scalar(view(g).sum()));
                        }
                      });
}

Var neg(Var a) { return scale(a, -1.0); }

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var softplus(Var a) {
  return unary(a, stable_softplus,
               [](double x, double) { return stable_sigmoid(x); });
}

Var sigmoid(Var a) {
  return unary(a, stable_sigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Var softmax_rows(Var a) {
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(av.rows(), av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto src = av.row_span(r);
    auto dst = out.row_span(r);
    const double m = *std::max_element(src.begin(), src.end());
    double total = 0.0;
    for (std::size_t c = 0; c < src.size(); ++c) {
      dst[c] = std::exp(src[c] - m);
      total += dst[c];
    }
    for (double& v : dst) v /= total;
  }
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    const Tensor& y = t.value(self);
    Tensor da = Tensor::matrix(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row_span(r);
      auto gr = g.row_span(r);
      double dot = 0.0;
      for (std::size_t c = 0; c < yr.size(); ++c) dot += gr[c] * yr[c];
      auto dr = da.row_span(r);
      for (std::size_t c = 0; c < yr.size(); ++c) dr[c] = yr[c] * (gr[c] - dot);
    }
    t.accumulate(aid, da);
  });
}

Var log(Var a) {
  return unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var square(Var a) {
  return unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var sqrt(Var a) {
  return unary(
      a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Var reciprocal(Var a) {
  return unary(
      a, [](double x) { return 1.0 / x; },
      [](double, double y) { return -y * y; });
}

Var activate(Var a, Activation act) {
  switch (act) {
    case Activation::kNone:
      return a;
    case Activation::kTanh:
      return tanh(a);
    case Activation::kSoftplus:
      return softplus(a);
    case Activation::kSigmoid:
      return sigmoid(a);
    case Activation::kSoftmax:
      return softmax_rows(a);
  }
  return a;
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var mask_mul(Var a, const Tensor& mask) {
  require_same_shape(a.value(), mask, "mask_mul");
  Tensor out = a.value();
  view(out).array() *= view(mask).array();
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid},
                      [aid, mask](Tape& t, std::size_t self) {
                        Tensor da = t.upstream(self);
                        view(da).array() *= view(mask).array();
                        t.accumulate(aid, da);
                      });
}

Var sum_all(Var a) {
  const double total = view(a.value()).sum();
  const std::size_t aid = a.id;
  return a.tape->push(Tensor::scalar(total), {aid},
                      [aid](Tape& t, std::size_t self) {
                        const Tensor& x = t.value(aid);
                        t.accumulate(aid, Tensor(x.shape(),
                                                 t.upstream(self).item()));
                      });
}

Var mean_all(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum_all(a), 1.0 / n);
}

Var sum_rows(Var a) {
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(av.rows(), 1);
  view(out) = view(av).rowwise().sum();
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    const Tensor& x = t.value(aid);
    Tensor da = Tensor::matrix(x.rows(), x.cols());
    view(da).colwise() = view(g).col(0);
    t.accumulate(aid, da);
  });
}

Var sum_cols(Var a) {
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(1, av.cols());
  view(out) = view(av).colwise().sum();
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    const Tensor& x = t.value(aid);
    Tensor da = Tensor::matrix(x.rows(), x.cols());
    view(da).rowwise() = view(g).row(0);
    t.accumulate(aid, da);
  });
}

Var logsumexp_rows(Var a) {
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(av.rows(), 1);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    auto src = av.row_span(r);
    const double m = *std::max_element(src.begin(), src.end());
    double total = 0.0;
    for (double v : src) total += std::exp(v - m);
    out(r, 0) = m + std::log(total);
  }
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    const Tensor& x = t.value(aid);
    const Tensor& y = t.value(self);
    Tensor da = Tensor::matrix(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto xr = x.row_span(r);
      auto dr = da.row_span(r);
      for (std::size_t c = 0; c < xr.size(); ++c) {
        dr[c] = g(r, 0) * std::exp(xr[c] - y(r, 0));
      }
    }
    t.accumulate(aid, da);
  });
}

Var col_slice(Var a, std::size_t start, std::size_t count) {
  const Tensor& av = a.value();
  if (start + count > av.cols()) {
    throw ShapeError("col_slice: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of " +
                     shape_string(av.shape()));
  }
  Tensor out = Tensor::matrix(av.rows(), count);
  view(out) = view(av).middleCols(static_cast<Eigen::Index>(start),
                                  static_cast<Eigen::Index>(count));
  const std::size_t aid = a.id;
  return a.tape->push(
      std::move(out), {aid}, [aid, start, count](Tape& t, std::size_t self) {
        const Tensor& x = t.value(aid);
        Tensor da = Tensor::matrix(x.rows(), x.cols());
        view(da).middleCols(static_cast<Eigen::Index>(start),
                            static_cast<Eigen::Index>(count)) =
            view(t.upstream(self));
        t.accumulate(aid, da);
      });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    if (p.tape != parts[0].tape) {
      throw ShapeError("concat_cols: operands live on different tapes");
    }
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row count mismatch");
    }
    ids.push_back(p.id);
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Tensor out = Tensor::matrix(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    const auto w = static_cast<Eigen::Index>(p.cols());
    view(out).middleCols(offset, w) = view(p.value());
    offset += w;
  }
  return parts[0].tape->push(
      std::move(out), ids, [ids, widths](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        Eigen::Index offset = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const auto w = static_cast<Eigen::Index>(widths[i]);
          if (t.requires_grad(ids[i])) {
            Tensor part = Tensor::matrix(g.rows(), widths[i]);
            view(part) = view(g).middleCols(offset, w);
            t.accumulate(ids[i], part);
          }
          offset += w;
        }
      });
}

Var diag(Var a) {
  const Tensor& av = a.value();
  if (av.rows() != av.cols()) {
    throw ShapeError("diag: matrix is not square " + shape_string(av.shape()));
  }
  Tensor out = Tensor::matrix(1, av.rows());
  for (std::size_t i = 0; i < av.rows(); ++i) out(0, i) = av(i, i);
  const std::size_t aid = a.id;
  return a.tape->push(std::move(out), {aid}, [aid](Tape& t, std::size_t self) {
    const Tensor& g = t.upstream(self);
    const Tensor& x = t.value(aid);
    Tensor da = Tensor::matrix(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) da(i, i) = g(0, i);
    t.accumulate(aid, da);
  });
}

namespace {

Eigen::LLT<detail::Mat> factor_spd(const Tensor& s, const char* op) {
  if (s.rows() != s.cols()) {
    throw ShapeError(std::string(op) + ": matrix is not square " +
                     shape_string(s.shape()));
  }
  Eigen::LLT<detail::Mat> llt(detail::Mat(view(s)));
  if (llt.info() != Eigen::Success) {
    throw NumericError(std::string(op) +
                       ": Cholesky factorization failed (matrix not SPD)");
  }
  return llt;
}

}  // namespace

Var quad_form_spd(Var s, Var d) {
  require_same_tape(s, d, "quad_form_spd");
  const Tensor& sv = s.value();
  const Tensor& dv = d.value();
  if (dv.cols() != sv.rows()) {
    throw ShapeError("quad_form_spd: rows of " + shape_string(dv.shape()) +
                     " against matrix " + shape_string(sv.shape()));
  }
  auto llt = factor_spd(sv, "quad_form_spd");
  // Y = D S^{-1}, one solve per row (as columns of D^T).
  detail::Mat y_t = llt.solve(detail::Mat(view(dv).transpose()));
  Tensor y = detail::to_tensor(y_t.transpose());
  Tensor out = Tensor::matrix(dv.rows(), 1);
  view(out) = (view(dv).array() * view(y).array()).rowwise().sum().matrix();
  const std::size_t sid = s.id, did = d.id;
  return s.tape->push(
      std::move(out), {sid, did},
      [sid, did, y = std::move(y)](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        if (t.requires_grad(did)) {
          Tensor dd = y;
          view(dd).array().colwise() *= 2.0 * view(g).col(0).array();
          t.accumulate(did, dd);
        }
        if (t.requires_grad(sid)) {
          detail::RowMat gy = view(y);
          gy.array().colwise() *= view(g).col(0).array();
          Tensor ds = Tensor::matrix(y.cols(), y.cols());
          view(ds).noalias() = -(gy.transpose() * view(y));
          t.accumulate(sid, ds);
        }
      });
}

Var logdet_spd(Var s) {
  const Tensor& sv = s.value();
  auto llt = factor_spd(sv, "logdet_spd");
  const double logdet =
      2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const std::size_t n = sv.rows();
  Tensor inv = detail::to_tensor(
      llt.solve(detail::Mat::Identity(static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(n))));
  const std::size_t sid = s.id;
  return s.tape->push(Tensor::scalar(logdet), {sid},
                      [sid, inv = std::move(inv)](Tape& t, std::size_t self) {
                        // d log det S / dS = S^{-T}; S symmetric.
                        t.accumulate_scaled(sid, inv, t.upstream(self).item());
                      });
}

Var logistic_bin_mass(Var upper, Var lower) {
  require_same_tape(upper, lower, "logistic_bin_mass");
  const Tensor& uv = upper.value();
  const Tensor& lv = lower.value();
  require_same_shape(uv, lv, "logistic_bin_mass");
  Tensor out = Tensor::matrix(uv.rows(), uv.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Reflect to the lower tail when both logits are large: the difference
    // of two values near 1 would otherwise cancel.
    if (uv[i] + lv[i] > 0.0) {
      out[i] = stable_sigmoid(-lv[i]) - stable_sigmoid(-uv[i]);
    } else {
      out[i] = stable_sigmoid(uv[i]) - stable_sigmoid(lv[i]);
    }
  }
  const std::size_t uid = upper.id, lid = lower.id;
  return upper.tape->push(
      std::move(out), {uid, lid}, [uid, lid](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        const Tensor& uv = t.value(uid);
        const Tensor& lv = t.value(lid);
        Tensor du = Tensor::matrix(g.rows(), g.cols());
        Tensor dl = Tensor::matrix(g.rows(), g.cols());
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double su = stable_sigmoid(uv[i]);
          const double sl = stable_sigmoid(lv[i]);
          du[i] = g[i] * su * (1.0 - su);
          dl[i] = -g[i] * sl * (1.0 - sl);
        }
        t.accumulate(uid, du);
        t.accumulate(lid, dl);
      });
}

}  // namespace ad

}  // namespace rdoae
