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

#include "rdoae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "eigen_view.hpp"
#include "rdoae/error.hpp"

namespace rdoae {

using detail::view;

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
  if (a.size() < 2) throw DomainError("pearson: need at least two values");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) {
    throw DomainError("pearson: degenerate (zero) variance");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double slope_through_origin(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("slope: length mismatch");
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (!(sxx > 0.0)) throw DomainError("slope: all abscissae are zero");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Tangent pairs.
// ---------------------------------------------------------------------------

TangentPair gen_tangent_pair(std::size_t dim, double norm, Rng& rng) {
  if (dim < 2) throw DomainError("gen_tangent_pair: dim must be >= 2");
  const double pi = std::numbers::pi;
  std::vector<double> alpha(dim - 1);
  for (std::size_t i = 0; i + 1 < alpha.size(); ++i) {
    alpha[i] = rng.uniform(0.0, pi);
  }
  alpha.back() = rng.uniform(0.0, 2.0 * pi);
  const double omega = rng.uniform(0.0, 2.0 * pi);

  // Unit w' in hyperspherical coordinates.
  std::vector<double> wp(dim, 0.0);
  double sin_prod = 1.0;
  for (std::size_t i = 0; i < dim - 1; ++i) {
    wp[i] = sin_prod * std::cos(alpha[i]);
    sin_prod *= std::sin(alpha[i]);
  }
  wp[dim - 1] = sin_prod;

  const double a1 = alpha[0];
  const double s1 = std::sin(a1);
  const double c1 = std::cos(a1);
  // rho: unit vector in the (v', w') plane orthogonal to tau = v' = e1.
  std::vector<double> rho(dim, 0.0), tau(dim, 0.0);
  tau[0] = 1.0;
  if (std::abs(s1) < 1e-300) {
    // w' parallel to v': any orthogonal direction spans the degenerate plane.
    rho[1] = 1.0;
  } else {
    for (std::size_t i = 0; i < dim; ++i) {
      rho[i] = (wp[i] - c1 * tau[i]) / s1;
    }
  }
  const double so = std::sin(omega);
  const double co = std::cos(omega);
  TangentPair out;
  out.alpha1 = a1;
  out.v = Tensor::matrix(1, dim);
  out.w = Tensor::matrix(1, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out.v[i] = norm * (-so * rho[i] + co * tau[i]);
    out.w[i] = norm * ((co * s1 - so * c1) * rho[i] + (so * s1 + co * c1) * tau[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Isometry.
// ---------------------------------------------------------------------------

IsoSide parse_side(const std::string& name) {
  if (name == "decoder") return IsoSide::kDecoder;
  if (name == "encoder") return IsoSide::kEncoder;
  throw ConfigError("unknown side '" + name + "' (decoder, encoder)");
}

std::string side_name(IsoSide side) {
  return side == IsoSide::kDecoder ? "decoder" : "encoder";
}

namespace {

double dot_rows(const Tensor& a, std::size_t ra, const Tensor& b,
                std::size_t rb) {
  auto x = a.row_span(ra);
  auto y = b.row_span(rb);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

Tensor row_diff(const Tensor& a, const Tensor& b, std::size_t r) {
  Tensor out = Tensor::matrix(1, a.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) out[c] = a(r, c) - b(r, c);
  return out;
}

}  // namespace

IsometryReport isometry_scan(const ModelSpec& spec, const ParamStore& params,
                             const Tensor& x, const MetricSpec& metric,
                             std::size_t pairs, IsoSide side,
                             std::uint64_t seed, double norm) {
  if (pairs < 2) throw DomainError("isometry_scan: need at least two pairs");
  if (x.rows() == 0) throw ShapeError("isometry_scan: empty sample");
  const std::size_t n_dim = spec.latent_dim;
  if (n_dim < 2) throw DomainError("isometry_scan: latent dim must be >= 2");

  std::vector<std::size_t> rows(pairs);
  for (std::size_t i = 0; i < pairs; ++i) rows[i] = i % x.rows();
  const Tensor base_x = x.select_rows(rows);
  const Tensor z = encode(spec, params, base_x);
  Tensor zv = z, zw = z;
  std::vector<double> vz_wz(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    Rng rng = Rng::derive(seed, i);
    TangentPair tp = gen_tangent_pair(n_dim, norm, rng);
    for (std::size_t j = 0; j < n_dim; ++j) {
      zv(i, j) += tp.v[j];
      zw(i, j) += tp.w[j];
    }
    vz_wz[i] = dot_rows(tp.v, 0, tp.w, 0);
  }
  const Tensor xhat = decode(spec, params, z);
  const Tensor xv = decode(spec, params, zv);
  const Tensor xw = decode(spec, params, zw);

  IsometryReport rep;
  rep.side = side;
  rep.pairs = pairs;
  rep.data.resize(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    const Tensor base = xhat.row_copy(i);
    rep.data[i] = bilinear_form(metric, base, row_diff(xv, xhat, i),
                                row_diff(xw, xhat, i));
  }
  if (side == IsoSide::kDecoder) {
    rep.latent = std::move(vz_wz);
  } else {
    // df(v_x) = f(x_hat + v_x) - f(x_hat) with v_x = g(z + v_z) - g(z).
    const Tensor f0 = encode(spec, params, xhat);
    const Tensor fv = encode(spec, params, xv);
    const Tensor fw = encode(spec, params, xw);
    rep.latent.resize(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
      Tensor dv = row_diff(fv, f0, i);
      Tensor dw = row_diff(fw, f0, i);
      rep.latent[i] = dot_rows(dv, 0, dw, 0);
    }
  }
  rep.r = pearson(rep.latent, rep.data);
  rep.slope = slope_through_origin(rep.latent, rep.data);
  return rep;
}

// ---------------------------------------------------------------------------
// Jacobian orthonormality.
// ---------------------------------------------------------------------------

Tensor decoder_jacobian(const ModelSpec& spec, const ParamStore& params,
                        const Tensor& z, double step) {
  const std::size_t n = spec.latent_dim;
  if (z.rows() != 1 || z.cols() != n) {
    throw ShapeError("decoder_jacobian expects one latent row");
  }
  if (!(step > 0.0)) throw DomainError("jacobian: step must be > 0");
  Tensor probes = Tensor::matrix(2 * n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      probes(2 * j, c) = z[c];
      probes(2 * j + 1, c) = z[c];
    }
    probes(2 * j, j) += step;
    probes(2 * j + 1, j) -= step;
    if (probes(2 * j, j) == z[j] || probes(2 * j + 1, j) == z[j]) {
      throw NumericError("jacobian: step underflows at latent value " +
                         std::to_string(z[j]));
    }
  }
  const Tensor out = decode(spec, params, probes);
  const std::size_t m = out.cols();
  Tensor jac = Tensor::matrix(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = probes(2 * j, j) - probes(2 * j + 1, j);
    for (std::size_t i = 0; i < m; ++i) {
      jac(i, j) = (out(2 * j, i) - out(2 * j + 1, i)) / h;
    }
  }
  return jac;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double cov_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size())) / std::abs(m);
}

}  // namespace

OrthoReport jacobian_orthonormality(const ModelSpec& spec,
                                    const ParamStore& params,
                                    const Tensor& z_points,
                                    const MetricSpec& metric, double lambda2,
                                    double sigma2, double step) {
  if (z_points.rows() == 0) throw ShapeError("ortho: no latent points");
  const std::size_t n = spec.latent_dim;
  OrthoReport rep;
  rep.points = z_points.rows();
  rep.expected_scale = 1.0 / (2.0 * lambda2 * sigma2);
  rep.scaled_identity_metric = metric.kind == MetricKind::kSqEuclideanMean;

  const Tensor xhat = decode(spec, params, z_points);
  std::vector<double> all_diag;
  double offdiag_sum = 0.0;
  std::size_t offdiag_count = 0;
  for (std::size_t p = 0; p < rep.points; ++p) {
    const Tensor jac = decoder_jacobian(spec, params, z_points.row_copy(p), step);
    const Tensor a = metric_tensor(metric, xhat.row_copy(p));
    const detail::RowMat g =
        view(jac).transpose() * view(a) * view(jac);
    std::vector<double> diag(n);
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      all_diag.push_back(diag[i]);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v =
            std::abs(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        off += v;
        offdiag_sum += v;
        ++offdiag_count;
      }
    }
    const double dm = mean_of(diag);
    rep.point_diag_mean.push_back(dm);
    rep.point_diag_cov.push_back(cov_of(diag));
    rep.point_offdiag_ratio.push_back(
        n > 1 ? off / static_cast<double>(n * (n - 1)) / dm : 0.0);

    double jsv = 0.0;
    if (rep.scaled_identity_metric) {
      Eigen::JacobiSVD<detail::Mat> svd(detail::Mat(view(jac)));
      const double c = a(0, 0);
      jsv = svd.singularValues().prod() *
            std::pow(c, static_cast<double>(n) / 2.0);
    } else {
      // sqrt(det(J^T A J)): the singular-value product of A^(1/2) J.
      jsv = std::sqrt(std::max(0.0, detail::Mat(g).determinant()));
    }
    rep.jsv.push_back(jsv);
  }
  rep.diag_mean = mean_of(all_diag);
  rep.diag_cov = cov_of(all_diag);
  rep.offdiag_ratio =
      offdiag_count ? (offdiag_sum / static_cast<double>(offdiag_count)) /
                          rep.diag_mean
                    : 0.0;
  rep.jsv_mean = mean_of(rep.jsv);
  rep.jsv_cov = cov_of(rep.jsv);
  return rep;
}

// ---------------------------------------------------------------------------
// Density proportionality.
// ---------------------------------------------------------------------------

PdfReport pdf_proportionality(const std::vector<double>& true_density,
                              const Tensor& log_prior_rows) {
  if (true_density.size() != log_prior_rows.size()) {
    throw ShapeError("pdf_proportionality: length mismatch");
  }
  PdfReport rep;
  rep.true_density = true_density;
  rep.model_density.reserve(true_density.size());
  for (double lp : log_prior_rows.values()) {
    rep.model_density.push_back(std::exp(lp));
  }
  rep.r = pearson(rep.true_density, rep.model_density);
  return rep;
}

PdfReport pdf_proportionality(const Checkpoint& ckpt, const Dataset& ds) {
  if (ds.density.empty()) {
    throw ConfigError("pdf_proportionality: dataset has no true densities");
  }
  return pdf_proportionality(ds.density, log_prior(ckpt, ds.x));
}

// ---------------------------------------------------------------------------
// Latent statistics.
// ---------------------------------------------------------------------------

double LatentStats::top_fraction(std::size_t k) const {
  const double total = std::accumulate(variance.begin(), variance.end(), 0.0);
  if (!(total > 0.0)) return 0.0;
  double top = 0.0;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) {
    top += variance[order[i]];
  }
  return top / total;
}

LatentStats latent_stats(const Tensor& z) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  if (n == 0) throw ShapeError("latent_stats: no rows");
  LatentStats s;
  s.mean.assign(d, 0.0);
  s.variance.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += z(r, c);
  }
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = z(r, c) - s.mean[c];
      s.variance[c] += dev * dev;
    }
  }
  for (double& v : s.variance) v /= static_cast<double>(n);
  s.order.resize(d);
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return s.variance[a] > s.variance[b];
                   });
  return s;
}

LatentStats latent_stats(const Checkpoint& ckpt, const Tensor& x) {
  return latent_stats(encode(ckpt, x));
}

Traversal latent_traverse(const ModelSpec& spec, const ParamStore& params,
                          const LatentStats& stats, std::size_t dim,
                          std::size_t steps, double span) {
  const std::size_t n = stats.mean.size();
  if (dim >= n) {
    throw DomainError("latent_traverse: dim " + std::to_string(dim) +
                      " out of range for " + std::to_string(n) + " latents");
  }
  if (steps == 0) throw DomainError("latent_traverse: steps must be >= 1");
  Traversal t;
  t.z = Tensor::matrix(steps, n);
  const double sd = std::sqrt(stats.variance[dim]);
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t c = 0; c < n; ++c) t.z(s, c) = stats.mean[c];
    if (steps > 1) {
      const double u = -1.0 + 2.0 * static_cast<double>(s) /
                                  static_cast<double>(steps - 1);
      t.z(s, dim) = stats.mean[dim] + u * span * sd;
    }
  }
  t.decoded = decode(spec, params, t.z);
  return t;
}

namespace {

double mse_rows(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

double clamped_reconstruction_error(const ModelSpec& spec,
                                    const ParamStore& params, const Tensor& x,
                                    std::size_t dim, double value) {
  Tensor z = encode(spec, params, x);
  if (dim >= z.cols()) throw DomainError("clamp: dim out of range");
  for (std::size_t r = 0; r < z.rows(); ++r) z(r, dim) = value;
  return mse_rows(x, decode(spec, params, z));
}

double reconstruction_error(const ModelSpec& spec, const ParamStore& params,
                            const Tensor& x) {
  return mse_rows(x, decode(spec, params, encode(spec, params, x)));
}

// ---------------------------------------------------------------------------
// Anomaly detection.
// ---------------------------------------------------------------------------

std::vector<double> anomaly_score(const Checkpoint& ckpt, const Tensor& x) {
  if (!ckpt.gmm) throw ConfigError("anomaly_score: checkpoint has no mixture");
  Tensor e = gmm_energy_rows(*ckpt.gmm, prior_features(ckpt, x));
  return {e.values().begin(), e.values().end()};
}

std::vector<int> threshold_flags(const std::vector<double>& scores,
                                 double ratio) {
  if (scores.empty()) throw DomainError("threshold_flags: no scores");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw DomainError("threshold_flags: ratio must be in (0, 1)");
  }
  const std::size_t n = scores.size();
  const auto k = std::min(
      n, static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) -
                                            1e-9)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<int> flags(n, 0);
  for (std::size_t i = 0; i < k; ++i) flags[idx[i]] = 1;
  return flags;
}

Prf precision_recall_f1(const std::vector<int>& flags,
                        const std::vector<int>& labels) {
  if (flags.size() != labels.size()) {
    throw ShapeError("precision_recall_f1: length mismatch");
  }
  Prf out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && labels[i]) ++out.tp;
    if (flags[i] && !labels[i]) ++out.fp;
    if (!flags[i] && labels[i]) ++out.fn;
  }
  const double tp = static_cast<double>(out.tp);
  out.precision = out.tp + out.fp ? tp / static_cast<double>(out.tp + out.fp) : 0.0;
  out.recall = out.tp + out.fn ? tp / static_cast<double>(out.tp + out.fn) : 0.0;
  const double s = out.precision + out.recall;
  out.f1 = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Linear 1-D model.
// ---------------------------------------------------------------------------

namespace {

constexpr double kLin1dDelta = 1e-12;

void check_lin1d(double lambda1, double lambda2, double sigma_x) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(sigma_x > 0.0)) {
    throw DomainError("linear1d: lambda1, lambda2 and sigma_x must be > 0");
  }
}

template <typename F>
double golden_min(F f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace

Lin1d linear1d_solution(double lambda1, double lambda2, double sigma_x,
                        const HKind& h) {
  check_lin1d(lambda1, lambda2, sigma_x);
  Lin1d out;
  out.b = 1.0 / std::sqrt(2.0 * lambda2);
  if (h.kind == HKindTag::kLog) {
    out.ab = 1.0;
  } else {
    const double c = lambda1 * sigma_x * sigma_x;
    const double disc = c * c - 2.0 * c;
    if (disc < 0.0) {
      throw DomainError("no real RDO fixed point: lambda1 * sigma_x^2 = " +
                        std::to_string(c) + " < 2");
    }
    out.ab = (c + std::sqrt(disc)) / (2.0 * c);
  }
  out.a = out.ab / out.b;
  return out;
}

double linear1d_loss(double a, double b, double lambda1, double lambda2,
                     double sigma_x, const HKind& h) {
  const double base =
      std::log(a) + std::log(sigma_x * std::sqrt(2.0 * std::numbers::pi *
                                                 std::numbers::e));
  const double e = a * b - 1.0;
  const double rec = h.kind == HKindTag::kLog
                         ? std::log(e * e + h.delta)
                         : e * e * sigma_x * sigma_x;
  return base + lambda1 * rec + lambda2 * b * b;
}

Lin1d linear1d_minimize(double lambda1, double lambda2, double sigma_x,
                        const HKind& h) {
  check_lin1d(lambda1, lambda2, sigma_x);
  HKind hk = h;
  if (hk.kind == HKindTag::kLog && !(hk.delta > 0.0)) hk.delta = kLin1dDelta;
  // Outer search over b; the inner search over p = ab at fixed b.
  auto inner = [&](double b) {
    return golden_min(
        [&](double p) {
          return linear1d_loss(p / b, b, lambda1, lambda2, sigma_x, hk);
        },
        0.5, 2.0);
  };
  const double b_hint = 1.0 / std::sqrt(2.0 * lambda2);
  const double b = golden_min(
      [&](double bb) {
        const double p = inner(bb);
        return linear1d_loss(p / bb, bb, lambda1, lambda2, sigma_x, hk);
      },
      b_hint * 1e-2, b_hint * 1e2);
  Lin1d out;
  out.b = b;
  out.ab = inner(b);
  out.a = out.ab / b;
  return out;
}

}  // namespace rdoae
