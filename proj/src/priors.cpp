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

#include "rdoae/priors.hpp"

#include <cmath>
#include <numbers>

#include "rdoae/error.hpp"

namespace rdoae {

std::string factorized_matrix_name(std::size_t dim, std::size_t layer) {
  return "prior.d" + std::to_string(dim) + ".H" + std::to_string(layer);
}

std::string factorized_bias_name(std::size_t dim, std::size_t layer) {
  return "prior.d" + std::to_string(dim) + ".b" + std::to_string(layer);
}

std::string factorized_factor_name(std::size_t dim, std::size_t layer) {
  return "prior.d" + std::to_string(dim) + ".a" + std::to_string(layer);
}

namespace {

double inverse_softplus(double y) { return std::log(std::expm1(y)); }

void check_factorized(const FactorizedSpec& spec) {
  if (spec.dims == 0) throw ConfigError("factorized prior needs dims > 0");
  if (spec.filters.size() < 2 || spec.filters.front() != 1 ||
      spec.filters.back() != 1) {
    throw ConfigError("factorized prior filters must start and end with 1");
  }
}

}  // namespace

void factorized_init(ParamStore& params, const FactorizedSpec& spec,
                     double init_scale, Rng* bias_jitter) {
  check_factorized(spec);
  if (!(init_scale > 0.0)) throw ConfigError("prior init scale must be > 0");
  const std::size_t k_layers = spec.layers();
  for (std::size_t d = 0; d < spec.dims; ++d) {
    for (std::size_t k = 0; k < k_layers; ++k) {
      const std::size_t in = spec.filters[k];
      const std::size_t out = spec.filters[k + 1];
      // Every hidden unit holds z / (w0 * scale) while the factors are zero;
      // middle layers average, the last layer sums back to z / scale.
      const double w0 = static_cast<double>(spec.filters[1]);
      double entry = 1.0 / static_cast<double>(in);
      if (k == 0) entry = 1.0 / (w0 * init_scale);
      if (k == k_layers - 1) entry = w0 / static_cast<double>(in);
      if (k_layers == 1) entry = 1.0 / init_scale;
      params.add(factorized_matrix_name(d, k),
                 Tensor::matrix(in, out, inverse_softplus(entry)));
      Tensor bias = Tensor::matrix(1, out);
      if (bias_jitter != nullptr) {
        for (double& v : bias.values()) v = bias_jitter->uniform(-0.5, 0.5);
      }
      params.add(factorized_bias_name(d, k), std::move(bias));
      if (k + 1 < k_layers) {
        params.add(factorized_factor_name(d, k), Tensor::matrix(1, out));
      }
    }
  }
}

namespace {

// Logit of the CDF for one latent column (L x 1).
Var factorized_logit(Tape& tape, const ParamStore& params,
                     const FactorizedSpec& spec, std::size_t d, Var col) {
  Var ones = tape.constant(Tensor::matrix(col.rows(), 1, 1.0));
  Var h = col;
  const std::size_t k_layers = spec.layers();
  for (std::size_t k = 0; k < k_layers; ++k) {
    Var hmat = ad::softplus(tape.param(params, factorized_matrix_name(d, k)));
    Var b = tape.param(params, factorized_bias_name(d, k));
    h = ad::add_row(ad::matmul(h, hmat), b);
    if (k + 1 < k_layers) {
      Var a = ad::tanh(tape.param(params, factorized_factor_name(d, k)));
      h = ad::add(h, ad::mul(ad::matmul(ones, a), ad::tanh(h)));
    }
  }
  return h;
}

}  // namespace

Var factorized_logp_rows(Tape& tape, const ParamStore& params,
                         const FactorizedSpec& spec, Var z) {
  check_factorized(spec);
  if (z.cols() != spec.dims) {
    throw ShapeError("factorized prior has " + std::to_string(spec.dims) +
                     " dims, latent has " + std::to_string(z.cols()));
  }
  Var total;
  for (std::size_t d = 0; d < spec.dims; ++d) {
    Var col = ad::col_slice(z, d, 1);
    Var upper = factorized_logit(tape, params, spec, d, ad::add_scalar(col, 0.5));
    Var lower =
        factorized_logit(tape, params, spec, d, ad::add_scalar(col, -0.5));
    Var logp = ad::log(ad::add_scalar(ad::logistic_bin_mass(upper, lower), 1e-12));
    total = d == 0 ? logp : ad::add(total, logp);
  }
  return total;
}

Tensor factorized_logp_rows(const ParamStore& params,
                            const FactorizedSpec& spec, const Tensor& z) {
  Tape tape;
  return factorized_logp_rows(tape, params, spec, tape.constant(z)).value();
}

double factorized_logp(const ParamStore& params, const FactorizedSpec& spec,
                       const Tensor& z) {
  if (z.rows() != 1) throw ShapeError("factorized_logp expects one row");
  return factorized_logp_rows(params, spec, z).item();
}

double factorized_cdf(const ParamStore& params, const FactorizedSpec& spec,
                      std::size_t dim, double value) {
  if (dim >= spec.dims) throw ShapeError("factorized_cdf: dim out of range");
  Tape tape;
  Var logit = factorized_logit(tape, params, spec, dim,
                               tape.constant(Tensor::scalar(value)));
  return ad::sigmoid(logit).value().item();
}

void GmmParams::validate() const {
  const std::size_t k = components();
  if (k == 0) throw ShapeError("gmm: no components");
  if (pi.rows() != 1 || pi.cols() != k || mu.rows() != k) {
    throw ShapeError("gmm: inconsistent component counts");
  }
  double total = 0.0;
  for (double p : pi.values()) {
    if (!(p >= 0.0)) throw DomainError("gmm: negative mixture weight");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("gmm: mixture weights sum to " + std::to_string(total));
  }
  const std::size_t f = features();
  for (std::size_t c = 0; c < k; ++c) {
    if (sigma[c].rows() != f || sigma[c].cols() != f) {
      throw ShapeError("gmm: covariance " + std::to_string(c) +
                       " is not " + std::to_string(f) + " x " +
                       std::to_string(f));
    }
  }
}

GmmParams GmmVars::values() const {
  GmmParams out;
  out.pi = pi.value();
  const std::size_t k = mu.size();
  const std::size_t f = k ? mu[0].cols() : 0;
  out.mu = Tensor::matrix(k, f);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < f; ++j) out.mu(c, j) = mu[c].value()(0, j);
    out.sigma.push_back(sigma[c].value());
  }
  return out;
}

GmmVars gmm_fit_batch(Var gamma, Var feats, double ridge) {
  const std::size_t l = gamma.rows();
  const std::size_t k = gamma.cols();
  const std::size_t f = feats.cols();
  if (feats.rows() != l) {
    throw ShapeError("gmm_fit_batch: " + std::to_string(l) +
                     " membership rows vs " + std::to_string(feats.rows()) +
                     " feature rows");
  }
  if (l < 2) throw ShapeError("gmm_fit_batch needs at least two rows");
  Tape& tape = *gamma.tape;
  Tensor ridge_eye = Tensor::identity(f);
  for (double& v : ridge_eye.values()) v *= ridge;
  Var ridge_var = tape.constant(std::move(ridge_eye));

  GmmVars out;
  Var nk_all = ad::sum_cols(gamma);  // 1 x K
  for (std::size_t c = 0; c < k; ++c) {
    if (!(nk_all.value()(0, c) >= 1e-12)) {
      throw NumericError("gmm_fit_batch: component " + std::to_string(c) +
                         " has total membership below 1e-12");
    }
  }
  out.pi = ad::scale(nk_all, 1.0 / static_cast<double>(l));
  for (std::size_t c = 0; c < k; ++c) {
    Var g = ad::col_slice(gamma, c, 1);
    Var nk = ad::sum_all(g);
    Var mu = ad::div_scalar_var(ad::sum_cols(ad::mul_col(feats, g)), nk);
    Var dev = ad::sub_row(feats, mu);
    Var cov = ad::div_scalar_var(
        ad::matmul(ad::transpose(ad::mul_col(dev, g)), dev), nk);
    out.mu.push_back(mu);
    out.sigma.push_back(ad::add(cov, ridge_var));
  }
  return out;
}

GmmVars gmm_constant(Tape& tape, const GmmParams& params) {
  params.validate();
  GmmVars out;
  out.pi = tape.constant(params.pi);
  for (std::size_t c = 0; c < params.components(); ++c) {
    out.mu.push_back(tape.constant(params.mu.row_copy(c)));
    out.sigma.push_back(tape.constant(params.sigma[c]));
  }
  return out;
}

Var gmm_energy_rows(const GmmVars& params, Var feats) {
  const std::size_t k = params.sigma.size();
  const double f = static_cast<double>(feats.cols());
  if (k == 0) throw ShapeError("gmm_energy: no components");
  if (params.mu[0].cols() != feats.cols()) {
    throw ShapeError("gmm_energy: feature width " +
                     std::to_string(feats.cols()) + " vs mixture width " +
                     std::to_string(params.mu[0].cols()));
  }
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  std::vector<Var> columns;
  columns.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    Var dev = ad::sub_row(feats, params.mu[c]);
    Var q = ad::quad_form_spd(params.sigma[c], dev);  // L x 1
    Var logdet = ad::logdet_spd(params.sigma[c]);
    Var log_pi = ad::log(ad::col_slice(params.pi, c, 1));
    // log pi_k - q/2 - logdet/2 - F/2 log 2 pi
    Var offset = ad::sub(log_pi, ad::scale(logdet, 0.5));
    Var col = ad::add_scalar_var(ad::scale(q, -0.5), offset);
    columns.push_back(ad::add_scalar(col, -0.5 * f * log_2pi));
  }
  return ad::neg(ad::logsumexp_rows(ad::concat_cols(columns)));
}

Var cov_penalty(const GmmVars& params) {
  Var total;
  for (std::size_t c = 0; c < params.sigma.size(); ++c) {
    Var diag = ad::diag(params.sigma[c]);
    for (double v : diag.value().values()) {
      if (!(v > 0.0)) {
        throw DomainError("cov_penalty: component " + std::to_string(c) +
                          " has a nonpositive diagonal entry");
      }
    }
    Var part = ad::sum_all(ad::reciprocal(diag));
    total = c == 0 ? part : ad::add(total, part);
  }
  return total;
}

GmmParams gmm_fit_batch(const Tensor& gamma, const Tensor& feats,
                        double ridge) {
  Tape tape;
  return gmm_fit_batch(tape.constant(gamma), tape.constant(feats), ridge)
      .values();
}

Tensor gmm_energy_rows(const GmmParams& params, const Tensor& feats) {
  Tape tape;
  GmmVars vars = gmm_constant(tape, params);
  return gmm_energy_rows(vars, tape.constant(feats)).value();
}

double gmm_energy(const GmmParams& params, const Tensor& feat) {
  if (feat.rows() != 1) throw ShapeError("gmm_energy expects one row");
  return gmm_energy_rows(params, feat).item();
}

double cov_penalty(const GmmParams& params) {
  Tape tape;
  GmmVars vars = gmm_constant(tape, params);
  return cov_penalty(vars).value().item();
}

Tensor en_memberships(const ParamStore& params, const MlpSpec& en,
                      const Tensor& feat, bool train_mode, Rng* rng) {
  if (!train_mode || rng == nullptr || en.dropout == 0.0) {
    return mlp_forward(params, en, feat);
  }
  Tape tape;
  return mlp_forward(tape, params, en, tape.constant(feat), rng).value();
}

Var en_memberships(Tape& tape, const ParamStore& params, const MlpSpec& en,
                   Var feat, Rng* dropout_rng) {
  return mlp_forward(tape, params, en, feat, dropout_rng);
}

GmmParams aggregate_gmm(const ParamStore& params, const MlpSpec& en,
                        const Tensor& feats_all, double ridge) {
  Tensor gamma = en_memberships(params, en, feats_all, false, nullptr);
  return gmm_fit_batch(gamma, feats_all, ridge);
}

}  // namespace rdoae
