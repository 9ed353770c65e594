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

#include "rdoae/presets.hpp"

#include "rdoae/error.hpp"

namespace rdoae {

namespace {

std::vector<Preset> all_presets() {
  std::vector<Preset> out;
  {
    Preset p;
    p.name = "toy";
    p.hidden = {64, 32, 16};
    p.latent = 3;
    p.en_hidden = {10};
    p.components = 3;
    p.epochs = 2000;
    p.batch_size = 256;
    p.rdo_d = {1e6, 1e3};
    p.rdo_log = {1e3, 1e3};
    p.dagmm = {1e-4, 1e-9};
    out.push_back(p);
  }
  {
    // Over-complete latent on the same 3-source data, factorized prior.
    Preset p = out.front();
    p.name = "toy-pca";
    p.latent = 8;
    p.prior = PriorKind::kFactorized;
    p.en_hidden = {};
    p.components = 0;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "kddcup";
    p.hidden = {60, 30};
    p.latent = 8;
    p.en_hidden = {10};
    p.components = 4;
    p.side_features = true;
    p.epochs = 100;
    p.ratio = 0.2;
    p.rdo_d = {100, 1000};
    p.rdo_log = {10, 100};
    p.dagmm = {0.1, 0.005};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "thyroid";
    p.hidden = {30, 24};
    p.latent = 6;
    p.en_hidden = {10};
    p.components = 2;
    p.side_features = true;
    p.epochs = 20000;
    p.ratio = 0.025;
    p.rdo_d = {10000, 1000};
    p.rdo_log = {100, 1000};
    p.dagmm = {0.1, 0.0001};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "arrhythmia";
    p.hidden = {10};
    p.latent = 4;
    p.en_hidden = {10};
    p.components = 2;
    p.side_features = true;
    p.epochs = 10000;
    p.ratio = 0.15;
    p.rdo_d = {1000, 1000};
    p.rdo_log = {1000, 100};
    p.dagmm = {0.1, 0.005};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "kddcup-rev";
    p.hidden = {60, 30};
    p.latent = 8;
    p.en_hidden = {10};
    p.components = 2;
    p.side_features = true;
    p.epochs = 100;
    p.ratio = 0.2;
    p.rdo_d = {100, 100};
    p.rdo_log = {100, 100};
    p.dagmm = {0.1, 0.005};
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : all_presets()) names.push_back(p.name);
  return names;
}

Preset get_preset(const std::string& name) {
  for (auto& p : all_presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (" + known + ")");
}

LambdaPair preset_lambdas(const Preset& p, LossKind loss, const HKind& h) {
  if (loss == LossKind::kDagmm) return p.dagmm;
  return h.kind == HKindTag::kLog ? p.rdo_log : p.rdo_d;
}

ModelSpec preset_spec(const Preset& p, std::size_t input_dim, const HKind& h,
                      const MetricSpec& metric) {
  ModelSpec spec = mirrored_spec(input_dim, p.hidden, p.latent, p.prior,
                                 p.en_hidden, p.components, p.side_features);
  spec.h = h;
  spec.metric_rec = metric;
  spec.metric_noise = metric;
  spec.validate();
  return spec;
}

TrainConfig preset_config(const Preset& p, LossKind loss, const HKind& h) {
  TrainConfig cfg;
  cfg.loss = loss;
  const LambdaPair l = preset_lambdas(p, loss, h);
  cfg.lambda1 = l.lambda1;
  cfg.lambda2 = l.lambda2;
  cfg.epochs = p.epochs;
  cfg.batch_size = p.batch_size;
  return cfg;
}

}  // namespace rdoae
