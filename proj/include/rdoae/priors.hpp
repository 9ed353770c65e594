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

// Latent priors: a per-dimension monotone CDF model evaluated on unit bins,
// and a Gaussian mixture whose parameters are moments weighted by the soft
// memberships of an estimation network.

#ifndef RDOAE_PRIORS_HPP_
#define RDOAE_PRIORS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "rdoae/numerics.hpp"
#include "rdoae/rng.hpp"
#include "rdoae/tape.hpp"
#include "rdoae/tensor.hpp"

namespace rdoae {

// ---------------------------------------------------------------------------
// Factorized prior.
//
// Dimension i has layers k = 0..K-1 with matrices H_k (stored raw, used as
// softplus(H_k)), biases b_k and, on all but the last layer, factors a_k:
//   h <- h softplus(H_k) + b_k
//   h <- h + tanh(a_k) * tanh(h)
// The CDF is sigmoid of the final scalar.
// ---------------------------------------------------------------------------

struct FactorizedSpec {
  std::size_t dims = 0;
  std::vector<std::size_t> filters = {1, 3, 3, 3, 1};

  std::size_t layers() const { return filters.size() - 1; }
};

std::string factorized_matrix_name(std::size_t dim, std::size_t layer);
std::string factorized_bias_name(std::size_t dim, std::size_t layer);
std::string factorized_factor_name(std::size_t dim, std::size_t layer);

// With scale s and no rng, every dimension starts at c(z) = sigmoid(z / s)
// exactly. A non-null rng adds uniform(-0.5, 0.5) jitter to the biases.
void factorized_init(ParamStore& params, const FactorizedSpec& spec,
                     double init_scale, Rng* bias_jitter);

// Per-row log P(z) = sum_i log(c(z_i + 1/2) - c(z_i - 1/2) + 1e-12).
Var factorized_logp_rows(Tape& tape, const ParamStore& params,
                         const FactorizedSpec& spec, Var z);
Tensor factorized_logp_rows(const ParamStore& params,
                            const FactorizedSpec& spec, const Tensor& z);
// Single latent vector (1 x N).
double factorized_logp(const ParamStore& params, const FactorizedSpec& spec,
                       const Tensor& z);
double factorized_cdf(const ParamStore& params, const FactorizedSpec& spec,
                      std::size_t dim, double value);

// ---------------------------------------------------------------------------
// Gaussian mixture.
// ---------------------------------------------------------------------------

struct GmmParams {
  Tensor pi;                  // 1 x K
  Tensor mu;                  // K x F
  std::vector<Tensor> sigma;  // K entries of F x F

  std::size_t components() const { return sigma.size(); }
  std::size_t features() const { return mu.cols(); }
  void validate() const;
  bool operator==(const GmmParams& other) const = default;
};

constexpr double kDefaultRidge = 1e-6;

GmmParams gmm_fit_batch(const Tensor& gamma, const Tensor& feats,
                        double ridge = kDefaultRidge);
// -log sum_k pi_k N(f; mu_k, Sigma_k) for every row of `feats`.
Tensor gmm_energy_rows(const GmmParams& params, const Tensor& feats);
double gmm_energy(const GmmParams& params, const Tensor& feat);
// sum_k sum_i 1 / Sigma_k,ii.
double cov_penalty(const GmmParams& params);

// Differentiable counterparts. Gradients reach gamma and the features.
struct GmmVars {
  Var pi;                  // 1 x K
  std::vector<Var> mu;     // 1 x F each
  std::vector<Var> sigma;  // F x F each

  GmmParams values() const;
};

GmmVars gmm_fit_batch(Var gamma, Var feats, double ridge = kDefaultRidge);
GmmVars gmm_constant(Tape& tape, const GmmParams& params);
Var gmm_energy_rows(const GmmVars& params, Var feats);
Var cov_penalty(const GmmVars& params);

// Estimation network: an MLP ending in softmax. Dropout is active only when
// a mask generator is supplied.
Tensor en_memberships(const ParamStore& params, const MlpSpec& en,
                      const Tensor& feat, bool train_mode, Rng* rng);
Var en_memberships(Tape& tape, const ParamStore& params, const MlpSpec& en,
                   Var feat, Rng* dropout_rng);

// One pass over the whole training set with dropout off, then a single fit.
GmmParams aggregate_gmm(const ParamStore& params, const MlpSpec& en,
                        const Tensor& feats_all, double ridge = kDefaultRidge);

}  // namespace rdoae

#endif  // RDOAE_PRIORS_HPP_
