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

#include "rdoae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "eigen_view.hpp"
#include "rdoae/error.hpp"

namespace rdoae {

using detail::view;

MetricSpec parse_metric(const std::string& name) {
  MetricSpec spec;
  if (name == "mse") {
    spec.kind = MetricKind::kSqEuclideanMean;
  } else if (name == "ssim") {
    spec.kind = MetricKind::kOneMinusSsim;
  } else if (name == "bce") {
    spec.kind = MetricKind::kBce;
  } else {
    throw ConfigError("unknown metric '" + name + "' (mse, ssim, bce)");
  }
  return spec;
}

std::string metric_name(const MetricSpec& spec) {
  switch (spec.kind) {
    case MetricKind::kSqEuclideanMean:
      return "mse";
    case MetricKind::kOneMinusSsim:
      return "ssim";
    case MetricKind::kBce:
      return "bce";
  }
  return "mse";
}

HKind parse_h(const std::string& name) {
  HKind h;
  if (name == "d") {
    h.kind = HKindTag::kIdentity;
  } else if (name == "log") {
    h.kind = HKindTag::kLog;
  } else {
    throw ConfigError("unknown h '" + name + "' (d, log)");
  }
  return h;
}

std::string h_name(const HKind& h) {
  return h.kind == HKindTag::kIdentity ? "d" : "log";
}

namespace {

void require_same_size(const Tensor& a, const Tensor& b, const char* op) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(op) + ": size mismatch " +
                     shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_window(const MetricSpec& spec, std::size_t m) {
  if (spec.window == 0 || m < spec.window) {
    throw DomainError("ssim: signal length " + std::to_string(m) +
                      " is shorter than the window " +
                      std::to_string(spec.window));
  }
}

struct WindowMoments {
  double mean = 0.0;
  double var = 0.0;
};

WindowMoments moments(const Tensor& x, std::size_t start, std::size_t w) {
  WindowMoments out;
  for (std::size_t i = 0; i < w; ++i) out.mean += x[start + i];
  out.mean /= static_cast<double>(w);
  for (std::size_t i = 0; i < w; ++i) {
    const double d = x[start + i] - out.mean;
    out.var += d * d;
  }
  out.var /= static_cast<double>(w);
  return out;
}

double ssim_window(const Tensor& x, const Tensor& y, std::size_t start,
                   std::size_t w, double eps) {
  const WindowMoments mx = moments(x, start, w);
  const WindowMoments my = moments(y, start, w);
  double cov = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    cov += (x[start + i] - mx.mean) * (y[start + i] - my.mean);
  }
  cov /= static_cast<double>(w);
  const double lum = (2.0 * mx.mean * my.mean + 2.0 * eps) /
                     (mx.mean * mx.mean + my.mean * my.mean + 2.0 * eps);
  const double con = (2.0 * cov + 2.0 * eps) / (mx.var + my.var + 2.0 * eps);
  return lum * con;
}

double clamp_bce(const MetricSpec& spec, double v) {
  return std::clamp(v, spec.bce_clamp, 1.0 - spec.bce_clamp);
}

}  // namespace

double distance(const MetricSpec& spec, const Tensor& x, const Tensor& y) {
  require_same_size(x, y, "distance");
  const std::size_t m = x.size();
  if (m == 0) throw ShapeError("distance: empty input");
  switch (spec.kind) {
    case MetricKind::kSqEuclideanMean: {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
      }
      return s / static_cast<double>(m);
    }
    case MetricKind::kOneMinusSsim: {
      require_window(spec, m);
      const std::size_t n_win = m - spec.window + 1;
      double total = 0.0;
      for (std::size_t s = 0; s < n_win; ++s) {
        total += ssim_window(x, y, s, spec.window, spec.eps_var);
      }
      return 1.0 - total / static_cast<double>(n_win);
    }
    case MetricKind::kBce: {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(y[i] > 0.0 && y[i] < 1.0) || !(x[i] >= 0.0 && x[i] <= 1.0)) {
          throw DomainError("bce: entry " + std::to_string(i) +
                            " outside the domain (x in [0,1], y in (0,1))");
        }
        s -= x[i] * std::log(y[i]) + (1.0 - x[i]) * std::log1p(-y[i]);
      }
      return s;
    }
  }
  return 0.0;
}

double bilinear_form(const MetricSpec& spec, const Tensor& x, const Tensor& u,
                     const Tensor& v) {
  require_same_size(x, u, "bilinear_form");
  require_same_size(x, v, "bilinear_form");
  const std::size_t m = x.size();
  switch (spec.kind) {
    case MetricKind::kSqEuclideanMean: {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += u[i] * v[i];
      return s / static_cast<double>(m);
    }
    case MetricKind::kOneMinusSsim: {
      require_window(spec, m);
      const std::size_t w = spec.window;
      const std::size_t n_win = m - w + 1;
      double total = 0.0;
      for (std::size_t s = 0; s < n_win; ++s) {
        const WindowMoments mx = moments(x, s, w);
        const WindowMoments mu = moments(u, s, w);
        const WindowMoments mv = moments(v, s, w);
        double cov = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
          cov += (u[s + i] - mu.mean) * (v[s + i] - mv.mean);
        }
        cov /= static_cast<double>(w);
        total += mu.mean * mv.mean / (2.0 * (mx.mean * mx.mean + spec.eps_var)) +
                 cov / (2.0 * (mx.var + spec.eps_var));
      }
      return total / static_cast<double>(n_win);
    }
    case MetricKind::kBce: {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
          throw DomainError("bce metric tensor: x entry " + std::to_string(i) +
                            " outside [0,1]");
        }
        const double xi = clamp_bce(spec, x[i]);
        s += 0.5 * (1.0 / xi + 1.0 / (1.0 - xi)) * u[i] * v[i];
      }
      return s;
    }
  }
  return 0.0;
}

double quadratic_form(const MetricSpec& spec, const Tensor& x,
                      const Tensor& dx) {
  return bilinear_form(spec, x, dx, dx);
}

Tensor metric_tensor(const MetricSpec& spec, const Tensor& x) {
  const std::size_t m = x.size();
  Tensor a = Tensor::matrix(m, m);
  switch (spec.kind) {
    case MetricKind::kSqEuclideanMean:
      for (std::size_t i = 0; i < m; ++i) a(i, i) = 1.0 / static_cast<double>(m);
      return a;
    case MetricKind::kBce: {
      Tensor e = Tensor::matrix(1, m);
      for (std::size_t i = 0; i < m; ++i) {
        e[i] = 1.0;
        a(i, i) = bilinear_form(spec, x, e, e);
        e[i] = 0.0;
      }
      return a;
    }
    case MetricKind::kOneMinusSsim: {
      // Sum of window blocks W_m / (2 mu^2) + W_v / (2 sigma^2), averaged.
      require_window(spec, m);
      const std::size_t w = spec.window;
      const std::size_t n_win = m - w + 1;
      const double wd = static_cast<double>(w);
      for (std::size_t s = 0; s < n_win; ++s) {
        const WindowMoments mx = moments(x, s, w);
        const double cm = 1.0 / (2.0 * (mx.mean * mx.mean + spec.eps_var));
        const double cv = 1.0 / (2.0 * (mx.var + spec.eps_var));
        for (std::size_t i = 0; i < w; ++i) {
          for (std::size_t j = 0; j < w; ++j) {
            const double wm = 1.0 / (wd * wd);
            const double wv = (i == j ? 1.0 / wd : 0.0) - wm;
            a(s + i, s + j) += (cm * wm + cv * wv) / static_cast<double>(n_win);
          }
        }
      }
      return a;
    }
  }
  return a;
}

double h_apply(const HKind& h, double d) {
  if (h.kind == HKindTag::kIdentity) return d;
  return std::log(d + h.delta);
}

namespace {

// M x n_win averaging matrix: column s has 1/W on rows s..s+W-1.
Tensor window_matrix(std::size_t m, std::size_t w) {
  const std::size_t n_win = m - w + 1;
  Tensor p = Tensor::matrix(m, n_win);
  for (std::size_t s = 0; s < n_win; ++s) {
    for (std::size_t i = 0; i < w; ++i) p(s + i, s) = 1.0 / static_cast<double>(w);
  }
  return p;
}

}  // namespace

Var distance_rows(const MetricSpec& spec, Var x, Var y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError("distance_rows: batch shapes differ");
  }
  const double m = static_cast<double>(x.cols());
  switch (spec.kind) {
    case MetricKind::kSqEuclideanMean:
      return ad::scale(ad::sum_rows(ad::square(ad::sub(x, y))), 1.0 / m);
    case MetricKind::kBce: {
      Var yc = ad::clamp(y, spec.bce_clamp, 1.0 - spec.bce_clamp);
      Var one_minus_x = ad::add_scalar(ad::neg(x), 1.0);
      Var one_minus_y = ad::add_scalar(ad::neg(yc), 1.0);
      Var ll = ad::add(ad::mul(x, ad::log(yc)),
                       ad::mul(one_minus_x, ad::log(one_minus_y)));
      return ad::neg(ad::sum_rows(ll));
    }
    case MetricKind::kOneMinusSsim: {
      require_window(spec, x.cols());
      Tape& tape = *x.tape;
      Var p = tape.constant(window_matrix(x.cols(), spec.window));
      const double n_win = static_cast<double>(x.cols() - spec.window + 1);
      const double e2 = 2.0 * spec.eps_var;
      Var mx = ad::matmul(x, p);
      Var my = ad::matmul(y, p);
      Var mxx = ad::sub(ad::matmul(ad::square(x), p), ad::square(mx));
      Var myy = ad::sub(ad::matmul(ad::square(y), p), ad::square(my));
      Var mxy = ad::sub(ad::matmul(ad::mul(x, y), p), ad::mul(mx, my));
      Var lum = ad::div(ad::add_scalar(ad::scale(ad::mul(mx, my), 2.0), e2),
                        ad::add_scalar(ad::add(ad::square(mx), ad::square(my)),
                                       e2));
      Var con = ad::div(ad::add_scalar(ad::scale(mxy, 2.0), e2),
                        ad::add_scalar(ad::add(mxx, myy), e2));
      Var mean_ssim = ad::scale(ad::sum_rows(ad::mul(lum, con)), 1.0 / n_win);
      return ad::add_scalar(ad::neg(mean_ssim), 1.0);
    }
  }
  return x;
}

Var h_apply(const HKind& h, Var d) {
  if (h.kind == HKindTag::kIdentity) return d;
  return ad::log(ad::add_scalar(d, h.delta));
}

}  // namespace rdoae
