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

#include "rdoae/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rdoae/error.hpp"

namespace rdoae {

PriorKind parse_prior(const std::string& name) {
  if (name == "factorized") return PriorKind::kFactorized;
  if (name == "gmm") return PriorKind::kGmm;
  throw ConfigError("unknown prior '" + name + "' (factorized, gmm)");
}

std::string prior_name(PriorKind kind) {
  return kind == PriorKind::kFactorized ? "factorized" : "gmm";
}

LossKind parse_loss(const std::string& name) {
  if (name == "rdo" || name == "radogaga") return LossKind::kRdo;
  if (name == "dagmm") return LossKind::kDagmm;
  throw ConfigError("unknown loss '" + name + "' (rdo, dagmm)");
}

std::string loss_name(LossKind kind) {
  return kind == LossKind::kRdo ? "rdo" : "dagmm";
}

void ModelSpec::validate() const {
  if (input_dim == 0 || latent_dim == 0) {
    throw ConfigError("model: input and latent dims must be positive");
  }
  encoder.validate();
  decoder.validate();
  if (encoder.in_dim() != input_dim || encoder.out_dim() != latent_dim) {
    throw ConfigError("model: encoder must map " + std::to_string(input_dim) +
                      " -> " + std::to_string(latent_dim));
  }
  if (decoder.in_dim() != latent_dim || decoder.out_dim() != input_dim) {
    throw ConfigError("model: decoder must map " + std::to_string(latent_dim) +
                      " -> " + std::to_string(input_dim));
  }
  if (prior == PriorKind::kFactorized) {
    if (factorized.dims != latent_dim) {
      throw ConfigError("model: factorized prior dims must equal latent dim");
    }
    if (side_features) {
      throw ConfigError("model: side features need the GMM prior");
    }
  } else {
    estimation.validate();
    if (estimation.in_dim() != feature_dim()) {
      throw ConfigError("model: estimation network input must be " +
                        std::to_string(feature_dim()));
    }
    if (estimation.activations.back() != Activation::kSoftmax) {
      throw ConfigError("model: estimation network must end in softmax");
    }
  }
}

ModelSpec mirrored_spec(std::size_t input_dim,
                        const std::vector<std::size_t>& hidden,
                        std::size_t latent_dim, PriorKind prior,
                        const std::vector<std::size_t>& en_hidden,
                        std::size_t components, bool side_features) {
  ModelSpec spec;
  spec.input_dim = input_dim;
  spec.latent_dim = latent_dim;
  spec.prior = prior;
  spec.side_features = side_features;

  spec.encoder.prefix = "enc";
  spec.encoder.widths.push_back(input_dim);
  for (std::size_t w : hidden) spec.encoder.widths.push_back(w);
  spec.encoder.widths.push_back(latent_dim);
  spec.decoder.prefix = "dec";
  spec.decoder.widths.assign(spec.encoder.widths.rbegin(),
                             spec.encoder.widths.rend());
  for (MlpSpec* net : {&spec.encoder, &spec.decoder}) {
    net->activations.assign(net->widths.size() - 1, Activation::kTanh);
    net->activations.back() = Activation::kNone;
  }

  if (prior == PriorKind::kFactorized) {
    spec.factorized.dims = latent_dim;
  } else {
    spec.estimation.prefix = "en";
    spec.estimation.widths.push_back(spec.feature_dim());
    for (std::size_t w : en_hidden) spec.estimation.widths.push_back(w);
    spec.estimation.widths.push_back(components);
    spec.estimation.activations.assign(spec.estimation.widths.size() - 1,
                                       Activation::kTanh);
    spec.estimation.activations.back() = Activation::kSoftmax;
    spec.estimation.dropout = 0.5;
  }
  spec.validate();
  return spec;
}

void TrainConfig::validate() const {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw ConfigError("train: lambda1 and lambda2 must be > 0");
  }
  if (!(noise_halfwidth > 0.0)) {
    throw ConfigError("train: noise half-width must be > 0");
  }
  if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
  if (batch_size < 2) throw ConfigError("train: batch size must be >= 2");
  if (snapshots == 0) throw ConfigError("train: snapshots must be >= 1");
  if (!(prior_init_scale > 0.0)) {
    throw ConfigError("train: prior init scale must be > 0");
  }
  if (!(ridge > 0.0)) throw ConfigError("train: ridge must be > 0");
}

Checkpoint init_checkpoint(const ModelSpec& spec, const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (cfg.loss == LossKind::kDagmm && spec.prior != PriorKind::kGmm) {
    throw ConfigError("the dagmm loss needs the GMM prior");
  }
  Checkpoint ckpt;
  ckpt.spec = spec;
  ckpt.config = cfg;
  Rng rng = Rng::derive(cfg.seed, 0);
  mlp_init(ckpt.params, spec.encoder, rng);
  mlp_init(ckpt.params, spec.decoder, rng);
  if (spec.prior == PriorKind::kGmm) {
    mlp_init(ckpt.params, spec.estimation, rng);
  } else {
    factorized_init(ckpt.params, spec.factorized, cfg.prior_init_scale, &rng);
  }
  return ckpt;
}

Tensor encode(const ModelSpec& spec, const ParamStore& params,
              const Tensor& x) {
  return mlp_forward(params, spec.encoder, x);
}

Tensor decode(const ModelSpec& spec, const ParamStore& params,
              const Tensor& z) {
  return mlp_forward(params, spec.decoder, z);
}

Tensor encode(const Checkpoint& ckpt, const Tensor& x) {
  return encode(ckpt.spec, ckpt.params, x);
}

Tensor decode(const Checkpoint& ckpt, const Tensor& z) {
  return decode(ckpt.spec, ckpt.params, z);
}

Tensor sample_noise(std::size_t n, std::size_t dim, double w, Rng& rng) {
  if (!(w > 0.0)) throw DomainError("noise half-width must be > 0");
  Tensor eps = Tensor::matrix(n, dim);
  for (double& v : eps.values()) v = rng.uniform(-w, w);
  return eps;
}

Tensor prior_features(const Checkpoint& ckpt, const Tensor& x) {
  Tensor z = encode(ckpt, x);
  if (!ckpt.spec.side_features) return z;
  Tensor side = en_side_features_rows(x, decode(ckpt, z));
  Tensor feats = Tensor::matrix(z.rows(), z.cols() + 2);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) feats(r, c) = z(r, c);
    feats(r, z.cols()) = side(r, 0);
    feats(r, z.cols() + 1) = side(r, 1);
  }
  return feats;
}

Tensor log_prior(const Checkpoint& ckpt, const Tensor& x) {
  if (ckpt.spec.prior == PriorKind::kFactorized) {
    return factorized_logp_rows(ckpt.params, ckpt.spec.factorized,
                                encode(ckpt, x));
  }
  if (!ckpt.gmm) throw ConfigError("checkpoint has no frozen mixture");
  Tensor e = gmm_energy_rows(*ckpt.gmm, prior_features(ckpt, x));
  for (double& v : e.values()) v = -v;
  return e;
}

namespace {

struct RateTerms {
  Var rate_rows;  // L x 1, -log P(z)
  std::optional<GmmVars> gmm;
};

RateTerms rate_rows(Tape& tape, const ModelSpec& spec, const ParamStore& params,
                    Var x, Var z, Var xhat, const TrainConfig& cfg,
                    Rng* dropout_rng) {
  RateTerms out;
  if (spec.prior == PriorKind::kFactorized) {
    out.rate_rows =
        ad::neg(factorized_logp_rows(tape, params, spec.factorized, z));
    return out;
  }
  Var feats = z;
  if (spec.side_features) {
    feats = ad::concat_cols({z, en_side_features_rows(x, xhat)});
  }
  Var gamma = en_memberships(tape, params, spec.estimation, feats, dropout_rng);
  out.gmm = gmm_fit_batch(gamma, feats, cfg.ridge);
  out.rate_rows = gmm_energy_rows(*out.gmm, feats);
  return out;
}

void check_batch(const ModelSpec& spec, const Tensor& batch) {
  if (batch.cols() != spec.input_dim) {
    throw ShapeError("batch width " + std::to_string(batch.cols()) +
                     " does not match input dim " +
                     std::to_string(spec.input_dim));
  }
}

}  // namespace

LossResult rdo_loss(Tape& tape, const ModelSpec& spec, const ParamStore& params,
                    const Tensor& batch, const TrainConfig& cfg, Rng& noise_rng,
                    const Tensor* noise, Rng* dropout_rng) {
  check_batch(spec, batch);
  const std::size_t n = batch.rows();
  Var x = tape.constant(batch);
  Var z = mlp_forward(tape, params, spec.encoder, x);
  Var xhat = mlp_forward(tape, params, spec.decoder, z);
  Tensor eps = noise != nullptr
                   ? *noise
                   : sample_noise(n, spec.latent_dim, cfg.noise_halfwidth,
                                  noise_rng);
  if (eps.rows() != n || eps.cols() != spec.latent_dim) {
    throw ShapeError("noise shape " + shape_string(eps.shape()) +
                     " does not match the latent batch");
  }
  Var xbreve = mlp_forward(tape, params, spec.decoder,
                           ad::add(z, tape.constant(std::move(eps))));

  RateTerms rate = rate_rows(tape, spec, params, x, z, xhat, cfg, dropout_rng);
  Var rec_rows = distance_rows(spec.metric_rec, x, xhat);
  Var rec_h_rows = h_apply(spec.h, rec_rows);
  Var noise_rows = distance_rows(spec.metric_noise, xhat, xbreve);

  Var rate_m = ad::mean_all(rate.rate_rows);
  Var rec_h_m = ad::mean_all(rec_h_rows);
  Var noise_m = ad::mean_all(noise_rows);
  Var loss = ad::add(ad::add(rate_m, ad::scale(rec_h_m, cfg.lambda1)),
                     ad::scale(noise_m, cfg.lambda2));

  LossResult out;
  out.loss = loss;
  out.parts.total = loss.value().item();
  out.parts.rate = rate_m.value().item();
  out.parts.rec = ad::mean_all(rec_rows).value().item();
  out.parts.rec_h = rec_h_m.value().item();
  out.parts.noise_dist = noise_m.value().item();
  return out;
}

LossResult dagmm_loss(Tape& tape, const ModelSpec& spec,
                      const ParamStore& params, const Tensor& batch,
                      const TrainConfig& cfg, Rng* dropout_rng) {
  check_batch(spec, batch);
  if (spec.prior != PriorKind::kGmm) {
    throw ConfigError("the dagmm loss needs the GMM prior");
  }
  Var x = tape.constant(batch);
  Var z = mlp_forward(tape, params, spec.encoder, x);
  Var xhat = mlp_forward(tape, params, spec.decoder, z);
  RateTerms rate = rate_rows(tape, spec, params, x, z, xhat, cfg, dropout_rng);
  Var rec_m = ad::mean_all(ad::sum_rows(ad::square(ad::sub(x, xhat))));
  Var rate_m = ad::mean_all(rate.rate_rows);
  Var penalty = cov_penalty(*rate.gmm);
  Var loss = ad::add(ad::add(rec_m, ad::scale(rate_m, cfg.lambda1)),
                     ad::scale(penalty, cfg.lambda2));

  LossResult out;
  out.loss = loss;
  out.parts.total = loss.value().item();
  out.parts.rate = rate_m.value().item();
  out.parts.rec = rec_m.value().item();
  out.parts.rec_h = out.parts.rec;
  out.parts.penalty = penalty.value().item();
  return out;
}

namespace {

std::string describe(const LossParts& p) {
  std::ostringstream os;
  os << "total=" << p.total << " rate=" << p.rate << " rec=" << p.rec
     << " rec_h=" << p.rec_h << " noise_dist=" << p.noise_dist
     << " penalty=" << p.penalty;
  return os.str();
}

}  // namespace

void freeze_gmm(Checkpoint& ckpt, const Tensor& x) {
  if (ckpt.spec.prior != PriorKind::kGmm) {
    throw ConfigError("freeze_gmm: checkpoint does not use the GMM prior");
  }
  ckpt.gmm = aggregate_gmm(ckpt.params, ckpt.spec.estimation,
                           prior_features(ckpt, x), ckpt.config.ridge);
}

Checkpoint train(const Tensor& x, const ModelSpec& spec,
                 const TrainConfig& cfg, const NormStats& norm,
                 const EpochCallback& on_epoch) {
  Checkpoint ckpt = init_checkpoint(spec, cfg);
  ckpt.norm = norm;
  check_batch(spec, x);
  const std::size_t n = x.rows();
  if (n < 2) throw ConfigError("train: need at least two rows");

  Rng shuffle_rng = Rng::derive(cfg.seed, 1);
  Rng noise_rng = Rng::derive(cfg.seed, 2);
  Rng dropout_rng = Rng::derive(cfg.seed, 3);
  AdamState adam = adam_init(ckpt.params, AdamConfig{cfg.lr});

  const std::size_t segment =
      std::max<std::size_t>(1, (cfg.epochs + cfg.snapshots - 1) / cfg.snapshots);
  ParamStore best = ckpt.params;
  double best_loss = 0.0;
  bool have_best = false;
  double segment_sum = 0.0;
  std::size_t segment_epochs = 0;
  LossParts last_finite;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffle_rng.permutation(n);
    double epoch_sum = 0.0;
    std::size_t epoch_rows = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      // A trailing single row cannot support a batch mixture fit.
      if (end - start < 2) break;
      std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);
      Tensor batch = x.select_rows(idx);
      Tape tape;
      LossResult res =
          cfg.loss == LossKind::kRdo
              ? rdo_loss(tape, spec, ckpt.params, batch, cfg, noise_rng,
                         nullptr, &dropout_rng)
              : dagmm_loss(tape, spec, ckpt.params, batch, cfg, &dropout_rng);
      if (!std::isfinite(res.parts.total)) {
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + " (" + describe(res.parts) +
                           "); last finite: " + describe(last_finite));
      }
      last_finite = res.parts;
      GradMap grads = tape.backward(res.loss, &ckpt.params);
      adam_update(adam, ckpt.params, grads);
      ++ckpt.log.steps;
      epoch_sum += res.parts.total * static_cast<double>(end - start);
      epoch_rows += end - start;
    }
    const double epoch_loss = epoch_sum / static_cast<double>(epoch_rows);
    ckpt.log.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
    segment_sum += epoch_loss;
    ++segment_epochs;
    if ((epoch + 1) % segment == 0 || epoch + 1 == cfg.epochs) {
      const double seg_loss = segment_sum / static_cast<double>(segment_epochs);
      ckpt.log.snapshot_loss.push_back(seg_loss);
      if (!have_best || seg_loss < best_loss) {
        best = ckpt.params;
        best_loss = seg_loss;
        have_best = true;
        ckpt.log.selected_snapshot = ckpt.log.snapshot_loss.size() - 1;
      }
      segment_sum = 0.0;
      segment_epochs = 0;
    }
  }
  ckpt.params = std::move(best);
  if (spec.prior == PriorKind::kGmm) freeze_gmm(ckpt, x);
  return ckpt;
}

}  // namespace rdoae
