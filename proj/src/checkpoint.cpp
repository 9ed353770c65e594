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

// Checkpoint layout:
//   version     "rdoae-checkpoint-1"
//   spec        {model: ModelSpec, train: TrainConfig}
//   params      {name: {shape, values}}
//   prior       {kind, gmm: {pi, mu, sigma} | null}
//   norm_stats  NormStats
//   log         {epoch_loss, snapshot_loss, selected_snapshot, steps}

#include <fstream>
#include <set>
#include <sstream>

#include "rdoae/error.hpp"
#include "rdoae/model.hpp"

namespace rdoae {

using nlohmann::json;

namespace {

json tensor_to_json(const Tensor& t) {
  return json{{"shape", t.shape()}, {"values", t.storage()}};
}

Tensor tensor_from_json(const json& j, const std::string& name) {
  try {
    return Tensor(j.at("shape").get<Shape>(),
                  j.at("values").get<std::vector<double>>());
  } catch (const ShapeError& e) {
    throw ShapeError("tensor '" + name + "': " + e.what());
  }
}

json mlp_to_json(const MlpSpec& spec) {
  std::vector<std::string> acts;
  for (Activation a : spec.activations) acts.push_back(activation_name(a));
  return json{{"prefix", spec.prefix},
              {"widths", spec.widths},
              {"activations", acts},
              {"dropout", spec.dropout}};
}

MlpSpec mlp_from_json(const json& j) {
  MlpSpec spec;
  spec.prefix = j.at("prefix").get<std::string>();
  spec.widths = j.at("widths").get<std::vector<std::size_t>>();
  for (const auto& a : j.at("activations")) {
    spec.activations.push_back(parse_activation(a.get<std::string>()));
  }
  spec.dropout = j.value("dropout", 0.0);
  return spec;
}

json metric_to_json(const MetricSpec& m) {
  return json{{"name", metric_name(m)},
              {"window", m.window},
              {"eps_var", m.eps_var},
              {"bce_clamp", m.bce_clamp}};
}

MetricSpec metric_from_json(const json& j) {
  MetricSpec m = parse_metric(j.at("name").get<std::string>());
  m.window = j.value("window", m.window);
  m.eps_var = j.value("eps_var", m.eps_var);
  m.bce_clamp = j.value("bce_clamp", m.bce_clamp);
  return m;
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

}  // namespace

json spec_to_json(const ModelSpec& spec) {
  json j{{"input_dim", spec.input_dim},
         {"latent_dim", spec.latent_dim},
         {"encoder", mlp_to_json(spec.encoder)},
         {"decoder", mlp_to_json(spec.decoder)},
         {"prior", prior_name(spec.prior)},
         {"side_features", spec.side_features},
         {"metric_rec", metric_to_json(spec.metric_rec)},
         {"metric_noise", metric_to_json(spec.metric_noise)},
         {"h", {{"kind", h_name(spec.h)}, {"delta", spec.h.delta}}}};
  if (spec.prior == PriorKind::kFactorized) {
    j["factorized"] = {{"dims", spec.factorized.dims},
                       {"filters", spec.factorized.filters}};
  } else {
    j["estimation"] = mlp_to_json(spec.estimation);
  }
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  try {
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.latent_dim = j.at("latent_dim").get<std::size_t>();
    spec.encoder = mlp_from_json(j.at("encoder"));
    spec.decoder = mlp_from_json(j.at("decoder"));
    spec.prior = parse_prior(j.at("prior").get<std::string>());
    spec.side_features = j.value("side_features", false);
    spec.metric_rec = metric_from_json(j.at("metric_rec"));
    spec.metric_noise = metric_from_json(j.at("metric_noise"));
    spec.h = parse_h(j.at("h").at("kind").get<std::string>());
    spec.h.delta = j.at("h").value("delta", spec.h.delta);
    if (spec.prior == PriorKind::kFactorized) {
      spec.factorized.dims = j.at("factorized").at("dims").get<std::size_t>();
      spec.factorized.filters =
          j.at("factorized").at("filters").get<std::vector<std::size_t>>();
    } else {
      spec.estimation = mlp_from_json(j.at("estimation"));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

json config_to_json(const TrainConfig& cfg) {
  return json{{"loss", loss_name(cfg.loss)},
              {"lambda1", cfg.lambda1},
              {"lambda2", cfg.lambda2},
              {"noise_halfwidth", cfg.noise_halfwidth},
              {"lr", cfg.lr},
              {"batch_size", cfg.batch_size},
              {"epochs", cfg.epochs},
              {"seed", cfg.seed},
              {"snapshots", cfg.snapshots},
              {"prior_init_scale", cfg.prior_init_scale},
              {"ridge", cfg.ridge}};
}

TrainConfig config_from_json(const json& j, const TrainConfig& defaults) {
  reject_unknown(j,
                 {"loss", "lambda1", "lambda2", "noise_halfwidth", "lr",
                  "batch_size", "epochs", "seed", "snapshots",
                  "prior_init_scale", "ridge"},
                 "train config");
  TrainConfig cfg = defaults;
  try {
    if (j.contains("loss")) cfg.loss = parse_loss(j["loss"].get<std::string>());
    cfg.lambda1 = j.value("lambda1", cfg.lambda1);
    cfg.lambda2 = j.value("lambda2", cfg.lambda2);
    cfg.noise_halfwidth = j.value("noise_halfwidth", cfg.noise_halfwidth);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.snapshots = j.value("snapshots", cfg.snapshots);
    cfg.prior_init_scale = j.value("prior_init_scale", cfg.prior_init_scale);
    cfg.ridge = j.value("ridge", cfg.ridge);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json checkpoint_to_json(const Checkpoint& ckpt) {
  json params = json::object();
  for (const auto& name : ckpt.params.names()) {
    params[name] = tensor_to_json(ckpt.params.get(name));
  }
  json prior{{"kind", prior_name(ckpt.spec.prior)}, {"gmm", nullptr}};
  if (ckpt.gmm) {
    json sigma = json::array();
    for (const auto& s : ckpt.gmm->sigma) sigma.push_back(tensor_to_json(s));
    prior["gmm"] = {{"pi", tensor_to_json(ckpt.gmm->pi)},
                    {"mu", tensor_to_json(ckpt.gmm->mu)},
                    {"sigma", sigma}};
  }
  return json{
      {"version", Checkpoint::kVersion},
      {"spec",
       {{"model", spec_to_json(ckpt.spec)},
        {"train", config_to_json(ckpt.config)}}},
      {"params", params},
      {"prior", prior},
      {"norm_stats", norm_to_json(ckpt.norm)},
      {"log",
       {{"epoch_loss", ckpt.log.epoch_loss},
        {"snapshot_loss", ckpt.log.snapshot_loss},
        {"selected_snapshot", ckpt.log.selected_snapshot},
        {"steps", ckpt.log.steps}}}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) {
    throw IoError("checkpoint: missing version");
  }
  if (j["version"] != Checkpoint::kVersion) {
    throw IoError("checkpoint: unsupported version " + j["version"].dump());
  }
  for (const char* key : {"spec", "params", "prior", "norm_stats", "log"}) {
    if (!j.contains(key)) {
      throw IoError(std::string("checkpoint: missing '") + key + "' section");
    }
  }
  Checkpoint ckpt;
  ckpt.spec = spec_from_json(j.at("spec").at("model"));
  ckpt.config = config_from_json(j.at("spec").at("train"));

  // Parameter order and shapes come from a fresh initialization of the spec.
  Checkpoint fresh = init_checkpoint(ckpt.spec, ckpt.config);
  const json& params = j.at("params");
  for (const auto& name : fresh.params.names()) {
    if (!params.contains(name)) {
      throw IoError("checkpoint: missing parameter '" + name + "'");
    }
    Tensor t = tensor_from_json(params.at(name), name);
    if (t.shape() != fresh.params.get(name).shape()) {
      throw ShapeError("checkpoint: parameter '" + name + "' has shape " +
                       shape_string(t.shape()) + ", expected " +
                       shape_string(fresh.params.get(name).shape()));
    }
    if (!t.all_finite()) {
      throw IoError("checkpoint: parameter '" + name + "' is not finite");
    }
    ckpt.params.add(name, std::move(t));
  }
  if (params.size() != fresh.params.size()) {
    throw IoError("checkpoint: unexpected extra parameters");
  }

  const json& prior = j.at("prior");
  if (prior.at("kind").get<std::string>() != prior_name(ckpt.spec.prior)) {
    throw IoError("checkpoint: prior kind disagrees with the model spec");
  }
  if (!prior.at("gmm").is_null()) {
    GmmParams g;
    g.pi = tensor_from_json(prior["gmm"].at("pi"), "gmm.pi");
    g.mu = tensor_from_json(prior["gmm"].at("mu"), "gmm.mu");
    for (const auto& s : prior["gmm"].at("sigma")) {
      g.sigma.push_back(tensor_from_json(s, "gmm.sigma"));
    }
    g.validate();
    if (g.features() != ckpt.spec.feature_dim() ||
        g.components() != ckpt.spec.components()) {
      throw ShapeError("checkpoint: frozen mixture does not match the spec");
    }
    ckpt.gmm = std::move(g);
  }
  ckpt.norm = norm_from_json(j.at("norm_stats"));
  const json& log = j.at("log");
  ckpt.log.epoch_loss = log.at("epoch_loss").get<std::vector<double>>();
  ckpt.log.snapshot_loss = log.at("snapshot_loss").get<std::vector<double>>();
  ckpt.log.selected_snapshot = log.at("selected_snapshot").get<std::size_t>();
  ckpt.log.steps = log.at("steps").get<std::size_t>();
  return ckpt;
}

void checkpoint_save(const Checkpoint& ckpt, const std::string& path) {
  const std::string text = checkpoint_to_json(ckpt).dump() + "\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint '" + path + "': " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace rdoae
