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

// Fully-connected networks, Adam, and the finite-difference oracle.

#ifndef RDOAE_NUMERICS_HPP_
#define RDOAE_NUMERICS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rdoae/rng.hpp"
#include "rdoae/tape.hpp"
#include "rdoae/tensor.hpp"

namespace rdoae {

// widths = {in, h1, ..., out}; activations has one entry per affine layer.
// Parameters are stored as "<prefix>.W<i>" (in x out) and "<prefix>.b<i>"
// (1 x out). Dropout, when nonzero, follows every hidden layer.
struct MlpSpec {
  std::string prefix;
  std::vector<std::size_t> widths;
  std::vector<Activation> activations;
  double dropout = 0.0;

  std::size_t layers() const { return activations.size(); }
  std::size_t in_dim() const { return widths.front(); }
  std::size_t out_dim() const { return widths.back(); }
  void validate() const;
};

std::string weight_name(const MlpSpec& spec, std::size_t layer);
std::string bias_name(const MlpSpec& spec, std::size_t layer);

// Uniform in +-sqrt(6 / (fan_in + fan_out)); zero biases.
void mlp_init(ParamStore& params, const MlpSpec& spec, Rng& rng);

// Plain evaluation, no dropout.
Tensor mlp_forward(const ParamStore& params, const MlpSpec& spec,
                   const Tensor& input);

// Recorded evaluation. Dropout masks are drawn from `dropout_rng` when it is
// non-null and spec.dropout > 0 (train mode); otherwise dropout is identity.
Var mlp_forward(Tape& tape, const ParamStore& params, const MlpSpec& spec,
                Var input, Rng* dropout_rng = nullptr);

// Train-time inverted dropout mask: entries are 0 or 1/(1-p).
Tensor dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for each entry.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& x, double step);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor).
double max_relative_error(const Tensor& a, const Tensor& b,
                          double floor = 1e-8);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::int64_t t = 0;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

AdamState adam_init(const ParamStore& params, AdamConfig config = {});

// One bias-corrected Adam step over every parameter of `params`.
void adam_update(AdamState& state, ParamStore& params, const GradMap& grads);

}  // namespace rdoae

#endif  // RDOAE_NUMERICS_HPP_
