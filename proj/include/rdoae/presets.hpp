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

// Named experiment presets: network sizes, loss weights and schedules for the
// toy mixture and the tabular anomaly benchmarks.

#ifndef RDOAE_PRESETS_HPP_
#define RDOAE_PRESETS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "rdoae/metrics.hpp"
#include "rdoae/model.hpp"

namespace rdoae {

struct LambdaPair {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

struct Preset {
  std::string name;
  std::vector<std::size_t> hidden;     // encoder hidden widths
  std::size_t latent = 0;
  PriorKind prior = PriorKind::kGmm;
  std::vector<std::size_t> en_hidden;  // estimation network hidden widths
  std::size_t components = 0;
  bool side_features = false;
  std::size_t epochs = 100;
  std::size_t batch_size = 1024;
  double ratio = 0.2;  // anomaly threshold ratio
  LambdaPair rdo_d;
  LambdaPair rdo_log;
  LambdaPair dagmm;
};

// "toy", "toy-pca", "thyroid", "arrhythmia", "kddcup", "kddcup-rev".
Preset get_preset(const std::string& name);
std::vector<std::string> preset_names();

LambdaPair preset_lambdas(const Preset& p, LossKind loss, const HKind& h);
ModelSpec preset_spec(const Preset& p, std::size_t input_dim, const HKind& h,
                      const MetricSpec& metric = {});
// Seed left at 0; lambdas from preset_lambdas.
TrainConfig preset_config(const Preset& p, LossKind loss, const HKind& h);

}  // namespace rdoae

#endif  // RDOAE_PRESETS_HPP_
