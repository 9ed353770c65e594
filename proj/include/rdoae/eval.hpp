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

// Numerical audits of trained models and the anomaly-detection harness.

#ifndef RDOAE_EVAL_HPP_
#define RDOAE_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rdoae/metrics.hpp"
#include "rdoae/model.hpp"
#include "rdoae/rng.hpp"
#include "rdoae/tensor.hpp"

namespace rdoae {

// Pearson correlation; throws DomainError when either side has no variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);
// Least-squares slope of y = s * x through the origin.
double slope_through_origin(const std::vector<double>& x,
                            const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Tangent pairs: v' = e1, w' a uniformly oriented unit vector in polar
// coordinates, then the (v', w') plane is rotated by a random angle and both
// vectors are scaled to `norm`.
// ---------------------------------------------------------------------------

struct TangentPair {
  Tensor v;  // 1 x dim
  Tensor w;  // 1 x dim
  double alpha1 = 0.0;
};

TangentPair gen_tangent_pair(std::size_t dim, double norm, Rng& rng);

// ---------------------------------------------------------------------------
// Isometry.
// ---------------------------------------------------------------------------

enum class IsoSide { kDecoder, kEncoder };

IsoSide parse_side(const std::string& name);
std::string side_name(IsoSide side);

struct IsometryReport {
  IsoSide side = IsoSide::kDecoder;
  std::size_t pairs = 0;
  double r = 0.0;
  double slope = 0.0;
  // Decoder side: latent = v_z . w_z, data = v_x^T A w_x.
  // Encoder side: latent = df(v_x) . df(w_x), data = v_x^T A w_x.
  std::vector<double> latent;
  std::vector<double> data;
};

// Pair i uses base row i mod n of `x` and its own generator derived from
// (seed, i). Tangents are taken at x_hat = g(f(x)), where A is evaluated.
IsometryReport isometry_scan(const ModelSpec& spec, const ParamStore& params,
                             const Tensor& x, const MetricSpec& metric,
                             std::size_t pairs, IsoSide side,
                             std::uint64_t seed, double norm = 0.01);

// ---------------------------------------------------------------------------
// Jacobian orthonormality of the decoder: G = J^T A J at each latent point,
// J by central differences.
// ---------------------------------------------------------------------------

struct OrthoReport {
  std::size_t points = 0;
  double expected_scale = 0.0;  // 1 / (2 lambda2 sigma^2)
  double diag_mean = 0.0;       // over all points and dims
  double diag_cov = 0.0;        // std / mean of every diagonal entry, pooled
  double offdiag_ratio = 0.0;   // mean |G_ij|, i != j, over mean G_ii
  double jsv_mean = 0.0;
  double jsv_cov = 0.0;
  // True when A = c I, where J_sv = prod s_j(J) * c^(N/2) exactly.
  bool scaled_identity_metric = true;
  std::vector<double> point_diag_mean;
  std::vector<double> point_diag_cov;
  std::vector<double> point_offdiag_ratio;
  std::vector<double> jsv;
};

Tensor decoder_jacobian(const ModelSpec& spec, const ParamStore& params,
                        const Tensor& z, double step = 1e-4);

OrthoReport jacobian_orthonormality(const ModelSpec& spec,
                                    const ParamStore& params,
                                    const Tensor& z_points,
                                    const MetricSpec& metric, double lambda2,
                                    double sigma2, double step = 1e-4);

// ---------------------------------------------------------------------------
// Density proportionality.
// ---------------------------------------------------------------------------

struct PdfReport {
  double r = 0.0;
  std::vector<double> true_density;
  std::vector<double> model_density;
};

// r between P_x and exp(log P_z).
PdfReport pdf_proportionality(const std::vector<double>& true_density,
                              const Tensor& log_prior_rows);
PdfReport pdf_proportionality(const Checkpoint& ckpt, const Dataset& ds);

// ---------------------------------------------------------------------------
// Latent statistics, traversal and the variance-ordering probe.
// ---------------------------------------------------------------------------

struct LatentStats {
  std::vector<double> mean;
  std::vector<double> variance;  // population
  std::vector<std::size_t> order;  // descending variance, ties by index
  double top_fraction(std::size_t k) const;
};

LatentStats latent_stats(const Tensor& z);
LatentStats latent_stats(const Checkpoint& ckpt, const Tensor& x);

struct Traversal {
  Tensor z;        // steps x N
  Tensor decoded;  // steps x M
};

// Dimension `dim` swept over mean +- span * std in `steps` evenly spaced
// values, the rest fixed at the mean. steps == 1 decodes the mean.
Traversal latent_traverse(const ModelSpec& spec, const ParamStore& params,
                          const LatentStats& stats, std::size_t dim,
                          std::size_t steps, double span = 2.0);

// Mean squared-error reconstruction of x when latent `dim` is replaced by
// `value` for every row.
double clamped_reconstruction_error(const ModelSpec& spec,
                                    const ParamStore& params, const Tensor& x,
                                    std::size_t dim, double value);
double reconstruction_error(const ModelSpec& spec, const ParamStore& params,
                            const Tensor& x);

// ---------------------------------------------------------------------------
// Anomaly detection.
// ---------------------------------------------------------------------------

std::vector<double> anomaly_score(const Checkpoint& ckpt, const Tensor& x);

// Flags the ceil(ratio * n) highest scores; ties go to the lower index.
std::vector<int> threshold_flags(const std::vector<double>& scores,
                                 double ratio);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

Prf precision_recall_f1(const std::vector<int>& flags,
                        const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Linear 1-D model z = a x, x_hat = b z, x ~ N(0, sigma_x^2), eps ~ N(0, 1):
//   L(a, b) = log a + log(sigma_x sqrt(2 pi e)) + lambda1 E[h(|x - x_hat|^2)]
//             + lambda2 b^2
// For h = log the expectation is log((ab - 1)^2 + delta) up to a constant.
// ---------------------------------------------------------------------------

struct Lin1d {
  double a = 0.0;
  double b = 0.0;
  double ab = 0.0;
};

Lin1d linear1d_solution(double lambda1, double lambda2, double sigma_x,
                        const HKind& h);
double linear1d_loss(double a, double b, double lambda1, double lambda2,
                     double sigma_x, const HKind& h);
// Golden-section search in (ab, b), which is a bijection of a, b > 0. The
// loss is unbounded below as a -> 0, so ab is confined to [1/2, 2]: the
// spurious stationary point of h = d lies at ab <= 1/2.
Lin1d linear1d_minimize(double lambda1, double lambda2, double sigma_x,
                        const HKind& h);

}  // namespace rdoae

#endif  // RDOAE_EVAL_HPP_
