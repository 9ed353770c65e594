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

// Distortion metrics D(x, y), their local metric tensors A(x), and the
// transform h applied to the reconstruction term of the loss.
//
// Plain functions take a single sample (any shape; read as a flat vector).
// The tape variants take L x M batches and return an L x 1 column.

#ifndef RDOAE_METRICS_HPP_
#define RDOAE_METRICS_HPP_

#include <cstddef>
#include <string>

#include "rdoae/tape.hpp"
#include "rdoae/tensor.hpp"

namespace rdoae {

enum class MetricKind { kSqEuclideanMean, kOneMinusSsim, kBce };

struct MetricSpec {
  MetricKind kind = MetricKind::kSqEuclideanMean;
  // 1-D sliding window for SSIM, stride 1.
  std::size_t window = 11;
  // Added to mu_x^2 and sigma_x^2 (and their cross terms) for SSIM.
  double eps_var = 1e-8;
  // Decoder outputs are clamped to [clamp, 1 - clamp] before BCE.
  double bce_clamp = 1e-6;
};

// "mse", "ssim", "bce".
MetricSpec parse_metric(const std::string& name);
std::string metric_name(const MetricSpec& spec);

enum class HKindTag { kIdentity, kLog };

struct HKind {
  HKindTag kind = HKindTag::kLog;
  double delta = 1e-12;
};

// "d" or "log".
HKind parse_h(const std::string& name);
std::string h_name(const HKind& h);

double distance(const MetricSpec& spec, const Tensor& x, const Tensor& y);

// u^T A(x) v. A(x) is symmetric, so this is the polarized quadratic form.
double bilinear_form(const MetricSpec& spec, const Tensor& x, const Tensor& u,
                     const Tensor& v);
double quadratic_form(const MetricSpec& spec, const Tensor& x,
                      const Tensor& dx);
// Dense M x M metric tensor at x.
Tensor metric_tensor(const MetricSpec& spec, const Tensor& x);

double h_apply(const HKind& h, double d);

// Per-row distances of two L x M batches. For BCE, `y` is clamped first.
Var distance_rows(const MetricSpec& spec, Var x, Var y);
Var h_apply(const HKind& h, Var d);

}  // namespace rdoae

#endif  // RDOAE_METRICS_HPP_
