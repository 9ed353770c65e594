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

#include "rdoae/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "eigen_view.hpp"
#include "rdoae/error.hpp"

namespace rdoae {

using detail::view;

void MlpSpec::validate() const {
  if (widths.size() < 2) {
    throw ConfigError("network '" + prefix + "' needs at least two widths");
  }
  if (activations.size() + 1 != widths.size()) {
    throw ConfigError("network '" + prefix + "' has " +
                      std::to_string(widths.size()) + " widths but " +
                      std::to_string(activations.size()) + " activations");
  }
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("network '" + prefix + "' has a zero width");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("network '" + prefix + "' dropout must be in [0, 1)");
  }
}

std::string weight_name(const MlpSpec& spec, std::size_t layer) {
  return spec.prefix + ".W" + std::to_string(layer);
}

std::string bias_name(const MlpSpec& spec, std::size_t layer) {
  return spec.prefix + ".b" + std::to_string(layer);
}

void mlp_init(ParamStore& params, const MlpSpec& spec, Rng& rng) {
  spec.validate();
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t fan_in = spec.widths[l];
    const std::size_t fan_out = spec.widths[l + 1];
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w = Tensor::matrix(fan_in, fan_out);
    for (double& v : w.values()) v = rng.uniform(-limit, limit);
    params.add(weight_name(spec, l), std::move(w));
    params.add(bias_name(spec, l), Tensor::matrix(1, fan_out));
  }
}

namespace {

void check_input(const MlpSpec& spec, std::size_t cols) {
  if (cols != spec.in_dim()) {
    throw ShapeError("network '" + spec.prefix + "' layer 0 expects width " +
                     std::to_string(spec.in_dim()) + ", got " +
                     std::to_string(cols));
  }
}

void apply_activation(detail::RowMat& h, Activation act) {
  switch (act) {
    case Activation::kNone:
      return;
    case Activation::kTanh:
      h = h.array().tanh();
      return;
    case Activation::kSoftplus:
      h = h.unaryExpr([](double x) {
        return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
      });
      return;
    case Activation::kSigmoid:
      h = h.unaryExpr([](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
      return;
    case Activation::kSoftmax:
      for (Eigen::Index r = 0; r < h.rows(); ++r) {
        const double m = h.row(r).maxCoeff();
        h.row(r) = (h.row(r).array() - m).exp();
        h.row(r) /= h.row(r).sum();
      }
      return;
  }
}

}  // namespace

Tensor mlp_forward(const ParamStore& params, const MlpSpec& spec,
                   const Tensor& input) {
  check_input(spec, input.cols());
  detail::RowMat h = view(input);
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const Tensor& w = params.get(weight_name(spec, l));
    const Tensor& b = params.get(bias_name(spec, l));
    if (w.rows() != static_cast<std::size_t>(h.cols())) {
      throw ShapeError("network '" + spec.prefix + "' layer " +
                       std::to_string(l) + " weight " +
                       shape_string(w.shape()) + " does not accept width " +
                       std::to_string(h.cols()));
    }
    detail::RowMat next = h * view(w);
    next.rowwise() += view(b).row(0);
    apply_activation(next, spec.activations[l]);
    h = std::move(next);
  }
  return detail::to_tensor(h);
}

Tensor dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  Tensor mask = Tensor::matrix(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (double& v : mask.values()) v = rng.uniform() < p ? 0.0 : keep;
  return mask;
}

Var mlp_forward(Tape& tape, const ParamStore& params, const MlpSpec& spec,
                Var input, Rng* dropout_rng) {
  check_input(spec, input.cols());
  Var h = input;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    Var w = tape.param(params, weight_name(spec, l));
    Var b = tape.param(params, bias_name(spec, l));
    if (w.rows() != h.cols()) {
      throw ShapeError("network '" + spec.prefix + "' layer " +
                       std::to_string(l) + " weight " +
                       shape_string(w.value().shape()) +
                       " does not accept width " + std::to_string(h.cols()));
    }
    h = ad::activate(ad::add_row(ad::matmul(h, w), b), spec.activations[l]);
    const bool hidden = l + 1 < spec.layers();
    if (hidden && dropout_rng != nullptr && spec.dropout > 0.0) {
      h = ad::mask_mul(
          h, dropout_mask(h.rows(), h.cols(), spec.dropout, *dropout_rng));
    }
  }
  return h;
}

Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double step) {
  if (!(step > 0.0)) throw DomainError("finite difference step must be > 0");
  Tensor grad(x.shape(), 0.0);
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = f(probe);
    probe[i] = orig - step;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite difference: non-finite evaluation at entry " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  if (a.size() != b.size()) {
    throw ShapeError("max_relative_error: size mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

AdamState adam_init(const ParamStore& params, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& name : params.names()) {
    const Tensor& p = params.get(name);
    state.m.emplace(name, Tensor(p.shape(), 0.0));
    state.v.emplace(name, Tensor(p.shape(), 0.0));
  }
  return state;
}

void adam_update(AdamState& state, ParamStore& params, const GradMap& grads) {
  for (const auto& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      throw ConfigError("adam: no gradient for parameter '" + name + "'");
    }
    if (!it->second.all_finite()) {
      throw NumericError("adam: non-finite gradient for '" + name + "'");
    }
    if (!state.m.count(name)) {
      state.m.emplace(name, Tensor(params.get(name).shape(), 0.0));
      state.v.emplace(name, Tensor(params.get(name).shape(), 0.0));
    }
  }
  state.t += 1;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (const auto& name : params.names()) {
    const Tensor& g = grads.at(name);
    Tensor& p = params.mutable_ref(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    if (g.size() != p.size()) {
      throw ShapeError("adam: gradient for '" + name + "' has shape " +
                       shape_string(g.shape()));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace rdoae
