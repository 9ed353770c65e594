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

#include <cmath>

#include <gtest/gtest.h>

#include "rdoae/error.hpp"
#include "rdoae/metrics.hpp"
#include "test_util.hpp"

namespace rdoae {
namespace {

using testing::random_tensor;

MetricSpec mse() { return parse_metric("mse"); }
MetricSpec ssim() { return parse_metric("ssim"); }
MetricSpec bce() { return parse_metric("bce"); }

TEST(Distance, SqEuclideanMean) {
  EXPECT_DOUBLE_EQ(distance(mse(), Tensor::row({0, 0}), Tensor::row({1, 1})), 1.0);
}

TEST(Distance, BceAtHalf) {
  EXPECT_NEAR(distance(bce(), Tensor::row({0.5}), Tensor::row({0.5})),
              0.6931, 1e-4);
}

TEST(Distance, SsimOfSignalWithItselfIsZero) {
  Rng rng(3);
  Tensor x = random_tensor(1, 30, rng, 0.1, 1.0);
  EXPECT_NEAR(distance(ssim(), x, x), 0.0, 1e-12);
}

TEST(Distance, DomainErrors) {
  EXPECT_THROW(distance(bce(), Tensor::row({0.5}), Tensor::row({1.0})),
               DomainError);
  EXPECT_THROW(distance(bce(), Tensor::row({1.5}), Tensor::row({0.5})),
               DomainError);
  EXPECT_THROW(distance(ssim(), Tensor::matrix(1, 10, 0.5),
                        Tensor::matrix(1, 10, 0.5)),
               DomainError);
  EXPECT_THROW(distance(mse(), Tensor::row({0}), Tensor::row({0, 1})),
               ShapeError);
}

TEST(QuadraticForm, ZeroDisplacement) {
  Rng rng(1);
  Tensor x = random_tensor(1, 12, rng, 0.1, 0.9);
  for (const auto& m : {mse(), ssim(), bce()}) {
    EXPECT_EQ(quadratic_form(m, x, Tensor::matrix(1, 12)), 0.0);
  }
}

TEST(QuadraticForm, BceAtHalf) {
  EXPECT_NEAR(quadratic_form(bce(), Tensor::row({0.5}), Tensor::row({0.1})),
              0.02, 1e-15);
}

TEST(QuadraticForm, SsimConstantShiftKeepsOnlyMeanTerm) {
  Rng rng(2);
  Tensor x = random_tensor(1, 11, rng, 0.2, 0.8);
  double mu = 0.0;
  for (double v : x.values()) mu += v / 11.0;
  const double delta = 0.01;
  const double q = quadratic_form(ssim(), x, Tensor::matrix(1, 11, delta));
  const double expected = delta * delta / (2.0 * (mu * mu + 1e-8));
  EXPECT_NEAR(q / expected, 1.0, 1e-12);
}

TEST(QuadraticForm, SsimDecompositionSumsToScaledIdentity) {
  // One window with mu^2 == sigma^2: A = (W_m + W_v) / (2 c) = I / (2 c W).
  const std::size_t w = 11;
  Rng rng(4);
  Tensor s = random_tensor(1, w, rng);
  double m = 0.0, v = 0.0;
  for (double e : s.values()) m += e / w;
  for (double e : s.values()) v += (e - m) * (e - m) / w;
  const double mu = 0.7;
  Tensor x = Tensor::matrix(1, w);
  for (std::size_t i = 0; i < w; ++i) x[i] = mu + mu * (s[i] - m) / std::sqrt(v);
  Tensor a = metric_tensor(ssim(), x);
  const double c = mu * mu + 1e-8;
  for (std::size_t i = 0; i < w; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      EXPECT_NEAR(a(i, j), i == j ? 1.0 / (2.0 * c * w) : 0.0, 1e-9);
    }
  }
}

TEST(QuadraticForm, MseIsScaledIdentity) {
  Tensor a = metric_tensor(mse(), Tensor::matrix(1, 4, 0.3));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_DOUBLE_EQ(a(i, j), i == j ? 0.25 : 0.0);
    }
  }
}

TEST(QuadraticForm, BceEndpointsAreClamped) {
  const double q =
      quadratic_form(bce(), Tensor::row({0.0, 0.5}), Tensor::row({0.1, 0.1}));
  EXPECT_TRUE(std::isfinite(q));
  EXPECT_GT(q, 0.02);
  EXPECT_THROW(quadratic_form(bce(), Tensor::row({1.5, 0.5}), Tensor::row({0.1, 0.1})),
               DomainError);
}

// Relative error of the second-order model at |dx| = 1e-3 |x|.
double quad_rel_error(const MetricSpec& m, const Tensor& x, const Tensor& dx) {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += dx[i];
  const double inc = distance(m, x, y) - distance(m, x, x);
  const double q = quadratic_form(m, x, dx);
  return std::abs(inc - q) / q;
}

Tensor scaled_direction(const Tensor& x, Rng& rng, double rel) {
  Tensor d = random_tensor(1, x.size(), rng);
  double nx = 0.0, nd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    nx += x[i] * x[i];
    nd += d[i] * d[i];
  }
  for (double& v : d.values()) v *= rel * std::sqrt(nx / nd);
  return d;
}

TEST(QuadraticForm, ApproximatesDistanceIncrement) {
  Rng rng(17);
  for (const auto& m : {mse(), ssim(), bce()}) {
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      Tensor x = random_tensor(1, 24, rng, 0.05, 0.95);
      worst = std::max(worst, quad_rel_error(m, x, scaled_direction(x, rng, 1e-3)));
    }
    EXPECT_LT(worst, 0.01) << metric_name(m);
  }
}

TEST(MetricTensor, SymmetricPositiveSemidefinite) {
  Rng rng(9);
  for (const auto& m : {mse(), ssim(), bce()}) {
    Tensor x = random_tensor(1, 16, rng, 0.05, 0.95);
    Tensor a = metric_tensor(m, x);
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t j = 0; j < 16; ++j) {
        EXPECT_NEAR(a(i, j), a(j, i), 1e-12);
      }
    }
    for (int t = 0; t < 50; ++t) {
      Tensor v = random_tensor(1, 16, rng);
      const double q = quadratic_form(m, x, v);
      if (m.kind == MetricKind::kOneMinusSsim) {
        EXPECT_GE(q, -1e-12);
      } else {
        EXPECT_GT(q, 0.0);
      }
    }
  }
}

TEST(MetricTensor, AgreesWithBilinearForm) {
  Rng rng(12);
  for (const auto& m : {mse(), ssim(), bce()}) {
    Tensor x = random_tensor(1, 13, rng, 0.1, 0.9);
    Tensor u = random_tensor(1, 13, rng);
    Tensor v = random_tensor(1, 13, rng);
    Tensor a = metric_tensor(m, x);
    double direct = 0.0;
    for (std::size_t i = 0; i < 13; ++i) {
      for (std::size_t j = 0; j < 13; ++j) direct += u[i] * a(i, j) * v[j];
    }
    EXPECT_NEAR(bilinear_form(m, x, u, v), direct, 1e-12 * (1 + std::abs(direct)));
  }
}

TEST(HApply, Examples) {
  EXPECT_DOUBLE_EQ(h_apply(parse_h("d"), 0.3), 0.3);
  EXPECT_NEAR(h_apply(parse_h("log"), 1.0), 0.0, 1e-11);
  EXPECT_DOUBLE_EQ(h_apply(parse_h("log"), 0.0), std::log(1e-12));
}

TEST(HApply, NamesRoundTrip) {
  EXPECT_EQ(h_name(parse_h("log")), "log");
  EXPECT_EQ(h_name(parse_h("d")), "d");
  EXPECT_THROW(parse_h("sqrt"), ConfigError);
  EXPECT_EQ(metric_name(parse_metric("ssim")), "ssim");
  EXPECT_THROW(parse_metric("l1"), ConfigError);
}

TEST(DistanceRows, MatchesScalarDistanceAndGradients) {
  Rng rng(21);
  for (const auto& m : {mse(), ssim(), bce()}) {
    Tensor x = random_tensor(3, 14, rng, 0.1, 0.9);
    Tensor y = random_tensor(3, 14, rng, 0.1, 0.9);
    Tape tape;
    Var d = distance_rows(m, tape.constant(x), tape.constant(y));
    ASSERT_EQ(d.rows(), 3u);
    for (std::size_t r = 0; r < 3; ++r) {
      EXPECT_NEAR(d.value()(r, 0), distance(m, x.row_copy(r), y.row_copy(r)),
                  1e-12);
    }
    auto graph = [&](Tape& t, Var v) {
      return ad::sum_all(h_apply(parse_h("log"), distance_rows(m, t.constant(x), v)));
    };
    EXPECT_LT(testing::gradient_error(graph, y), 1e-4) << metric_name(m);
  }
}

}  // namespace
}  // namespace rdoae
