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

// Autoencoder with a latent prior, the two training losses, the training
// loop, and checkpoints.
//
// Rate-distortion loss, per sample, averaged over the batch:
//   -log P(z) + lambda1 * h(D1(x, g(z))) + lambda2 * D2(g(z), g(z + eps))
// with eps ~ U[-w, w) drawn fresh per sample and step.
//
// Baseline (GMM prior only):
//   |x - g(z)|^2 + lambda1 * (-log P(z)) + lambda2 * sum_k sum_i 1/Sigma_k,ii

#ifndef RDOAE_MODEL_HPP_
#define RDOAE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdoae/data.hpp"
#include "rdoae/metrics.hpp"
#include "rdoae/numerics.hpp"
#include "rdoae/priors.hpp"
#include "rdoae/rng.hpp"
#include "rdoae/tape.hpp"
#include "rdoae/tensor.hpp"

namespace rdoae {

enum class PriorKind { kFactorized, kGmm };
enum class LossKind { kRdo, kDagmm };

PriorKind parse_prior(const std::string& name);
std::string prior_name(PriorKind kind);
// "rdo" (alias "radogaga") or "dagmm".
LossKind parse_loss(const std::string& name);
std::string loss_name(LossKind kind);

struct ModelSpec {
  std::size_t input_dim = 0;
  std::size_t latent_dim = 0;
  MlpSpec encoder;
  MlpSpec decoder;
  PriorKind prior = PriorKind::kGmm;
  FactorizedSpec factorized;
  MlpSpec estimation;  // GMM prior only; input width = feature_dim()
  bool side_features = false;
  MetricSpec metric_rec;
  MetricSpec metric_noise;
  HKind h;

  std::size_t components() const { return estimation.out_dim(); }
  std::size_t feature_dim() const {
    return latent_dim + (side_features ? 2 : 0);
  }
  void validate() const;
};

// Mirrored tanh autoencoder: encoder widths {M, hidden..., N}, decoder the
// reverse; every layer is tanh except the last of each half. With a GMM prior
// the estimation network is {F, en_hidden..., K}, tanh + dropout 0.5 on the
// hidden layers and softmax on the output.
ModelSpec mirrored_spec(std::size_t input_dim,
                        const std::vector<std::size_t>& hidden,
                        std::size_t latent_dim, PriorKind prior,
                        const std::vector<std::size_t>& en_hidden = {},
                        std::size_t components = 0,
                        bool side_features = false);

struct TrainConfig {
  LossKind loss = LossKind::kRdo;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double noise_halfwidth = 0.5;
  double lr = 1e-4;
  std::size_t batch_size = 1024;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  std::size_t snapshots = 10;
  double prior_init_scale = 10.0;
  double ridge = kDefaultRidge;

  double noise_variance() const {
    return noise_halfwidth * noise_halfwidth / 3.0;
  }
  void validate() const;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> snapshot_loss;
  std::size_t selected_snapshot = 0;
  std::size_t steps = 0;
};

struct Checkpoint {
  static constexpr const char* kVersion = "rdoae-checkpoint-1";

  ModelSpec spec;
  TrainConfig config;
  ParamStore params;
  std::optional<GmmParams> gmm;  // frozen mixture for scoring
  NormStats norm;
  TrainLog log;
};

Checkpoint init_checkpoint(const ModelSpec& spec, const TrainConfig& cfg);

Tensor encode(const Checkpoint& ckpt, const Tensor& x);
Tensor decode(const Checkpoint& ckpt, const Tensor& z);
Tensor encode(const ModelSpec& spec, const ParamStore& params, const Tensor& x);
Tensor decode(const ModelSpec& spec, const ParamStore& params, const Tensor& z);

// i.i.d. U[-w, w).
Tensor sample_noise(std::size_t n, std::size_t dim, double w, Rng& rng);

// Estimation-network features [z | side features(x, g(z))].
Tensor prior_features(const Checkpoint& ckpt, const Tensor& x);
// log P(z) per row of x: -gmm_energy for GMM checkpoints (needs the frozen
// mixture), factorized_logp otherwise.
Tensor log_prior(const Checkpoint& ckpt, const Tensor& x);

struct LossParts {
  double total = 0.0;
  double rate = 0.0;        // mean -log P(z)
  double rec = 0.0;         // mean D1(x, x_hat), or |x - x_hat|^2 (baseline)
  double rec_h = 0.0;       // mean h(D1); equals rec for the baseline
  double noise_dist = 0.0;  // mean D2(x_hat, x_breve)
  double penalty = 0.0;     // covariance penalty (baseline)
};

struct LossResult {
  Var loss;
  LossParts parts;
};

// `noise`, when given, replaces the fresh draw (used for gradient checks).
// `dropout_rng` null disables estimation-network dropout.
LossResult rdo_loss(Tape& tape, const ModelSpec& spec, const ParamStore& params,
                    const Tensor& batch, const TrainConfig& cfg, Rng& noise_rng,
                    const Tensor* noise = nullptr,
                    Rng* dropout_rng = nullptr);
LossResult dagmm_loss(Tape& tape, const ModelSpec& spec,
                      const ParamStore& params, const Tensor& batch,
                      const TrainConfig& cfg, Rng* dropout_rng = nullptr);

// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

// Minibatch Adam. The parameter set with the lowest mean training loss over
// its segment (epochs / snapshots epochs each) is returned; GMM checkpoints
// get their frozen mixture from aggregate_gmm over `x`.
Checkpoint train(const Tensor& x, const ModelSpec& spec,
                 const TrainConfig& cfg, const NormStats& norm = {},
                 const EpochCallback& on_epoch = {});

// Refits the frozen mixture of a GMM checkpoint on `x`.
void freeze_gmm(Checkpoint& ckpt, const Tensor& x);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const TrainConfig& cfg);
// Unknown keys are rejected.
TrainConfig config_from_json(const nlohmann::json& j,
                             const TrainConfig& defaults = {});

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void checkpoint_save(const Checkpoint& ckpt, const std::string& path);
Checkpoint checkpoint_load(const std::string& path);

}  // namespace rdoae

#endif  // RDOAE_MODEL_HPP_
