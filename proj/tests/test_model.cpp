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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "rdoae/data.hpp"
#include "rdoae/error.hpp"
#include "rdoae/model.hpp"
#include "test_util.hpp"

namespace rdoae {
namespace {

using testing::random_tensor;

ModelSpec small_gmm_spec(bool side = true) {
  return mirrored_spec(6, {5}, 2, PriorKind::kGmm, {4}, 2, side);
}

ModelSpec small_factorized_spec() {
  return mirrored_spec(6, {5}, 2, PriorKind::kFactorized);
}

TrainConfig small_config(LossKind loss = LossKind::kRdo) {
  TrainConfig cfg;
  cfg.loss = loss;
  cfg.lambda1 = 10.0;
  cfg.lambda2 = 5.0;
  cfg.batch_size = 16;
  cfg.epochs = 3;
  cfg.seed = 11;
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() /
          ("rdoae_test_model_" + name))
      .string();
}

void zero_mlp(ParamStore& params, const MlpSpec& mlp) {
  for (std::size_t l = 0; l < mlp.layers(); ++l) {
    Tensor& w = params.mutable_ref(weight_name(mlp, l));
    for (double& v : w.values()) v = 0.0;
  }
}

TEST(Encode, ZeroWeightsGiveBiasChain) {
  ModelSpec spec = small_factorized_spec();
  Checkpoint ckpt = init_checkpoint(spec, small_config());
  zero_mlp(ckpt.params, spec.encoder);
  Tensor& b0 = ckpt.params.mutable_ref(bias_name(spec.encoder, 0));
  for (std::size_t j = 0; j < b0.size(); ++j) b0[j] = 0.1 * (j + 1.0);
  Tensor& b1 = ckpt.params.mutable_ref(bias_name(spec.encoder, 1));
  b1[0] = 0.3;
  b1[1] = -0.7;
  Rng rng(1);
  Tensor z = encode(ckpt, random_tensor(4, 6, rng));
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_DOUBLE_EQ(z(r, 0), 0.3);
    EXPECT_DOUBLE_EQ(z(r, 1), -0.7);
  }
}

TEST(Encode, Deterministic) {
  Checkpoint ckpt = init_checkpoint(small_factorized_spec(), small_config());
  Rng rng(2);
  Tensor row = random_tensor(1, 6, rng);
  Tensor x = Tensor::matrix(2, 6);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 6; ++c) x(r, c) = row(0, c);
  }
  Tensor z = encode(ckpt, x);
  EXPECT_EQ(z.row_copy(0), z.row_copy(1));
}

TEST(Encode, ShapeMismatchThrows) {
  Checkpoint ckpt = init_checkpoint(small_factorized_spec(), small_config());
  EXPECT_THROW(encode(ckpt, Tensor::matrix(3, 5)), ShapeError);
  EXPECT_THROW(decode(ckpt, Tensor::matrix(3, 3)), ShapeError);
}

TEST(Decode, ZeroWeightsGiveConstantOutput) {
  ModelSpec spec = small_factorized_spec();
  Checkpoint ckpt = init_checkpoint(spec, small_config());
  zero_mlp(ckpt.params, spec.decoder);
  Rng rng(3);
  Tensor out = decode(ckpt, random_tensor(5, 2, rng, -4.0, 4.0));
  for (std::size_t r = 1; r < 5; ++r) EXPECT_EQ(out.row_copy(r), out.row_copy(0));
}

TEST(Decode, LinearDecoderIsHomogeneous) {
  ModelSpec spec = small_factorized_spec();
  spec.decoder.activations.assign(spec.decoder.layers(), Activation::kNone);
  Checkpoint ckpt = init_checkpoint(spec, small_config());
  for (std::size_t l = 0; l < spec.decoder.layers(); ++l) {
    Tensor& b = ckpt.params.mutable_ref(bias_name(spec.decoder, l));
    for (double& v : b.values()) v = 0.0;
  }
  Tensor z = Tensor::from_rows({{0.4, -1.3}, {2.0, 0.5}});
  Tensor z2 = z;
  for (double& v : z2.values()) v *= 2.0;
  Tensor a = decode(ckpt, z);
  Tensor b = decode(ckpt, z2);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], 2.0 * a[i], 1e-12);
}

TEST(SampleNoise, UniformMoments) {
  Rng rng(4);
  const std::size_t n = 500000;
  Tensor eps = sample_noise(n, 2, 0.5, rng);
  double m0 = 0, m1 = 0, v0 = 0, c01 = 0;
  double lo = 1.0, hi = -1.0;
  for (std::size_t r = 0; r < n; ++r) {
    m0 += eps(r, 0);
    m1 += eps(r, 1);
    lo = std::min(lo, eps(r, 0));
    hi = std::max(hi, eps(r, 0));
  }
  m0 /= n;
  m1 /= n;
  for (std::size_t r = 0; r < n; ++r) {
    v0 += (eps(r, 0) - m0) * (eps(r, 0) - m0);
    c01 += (eps(r, 0) - m0) * (eps(r, 1) - m1);
  }
  v0 /= n;
  c01 /= n;
  EXPECT_NEAR(v0, 1.0 / 12.0, 1e-3);
  EXPECT_NEAR(m0, 0.0, 2e-3);
  EXPECT_NEAR(c01, 0.0, 2e-3);
  EXPECT_GE(lo, -0.5);
  EXPECT_LT(hi, 0.5);
  EXPECT_THROW(sample_noise(2, 2, 0.0, rng), DomainError);
}

TEST(RdoLoss, StubArithmetic) {
  const double total = 2.0 + 100.0 * h_apply(parse_h("log"), 0.1) + 1000.0 * 0.01;
  EXPECT_NEAR(total, -218.2585, 1e-4);
}

TEST(DagmmLoss, StubArithmetic) {
  EXPECT_NEAR(0.5 + 0.1 * 2.0 + 0.005 * 3.0, 0.715, 1e-12);
}

class RdoLossDecomposition : public ::testing::TestWithParam<bool> {};

TEST_P(RdoLossDecomposition, TotalEqualsParts) {
  const bool gmm = GetParam();
  ModelSpec spec = gmm ? small_gmm_spec() : small_factorized_spec();
  TrainConfig cfg = small_config();
  Checkpoint ckpt = init_checkpoint(spec, cfg);
  Rng rng(5);
  Tensor batch = random_tensor(8, 6, rng, 0.0, 1.0);
  Tape tape;
  LossResult res = rdo_loss(tape, spec, ckpt.params, batch, cfg, rng);
  const LossParts& p = res.parts;
  EXPECT_NEAR(p.total, p.rate + cfg.lambda1 * p.rec_h + cfg.lambda2 * p.noise_dist,
              1e-12 * std::max(1.0, std::abs(p.total)));
  EXPECT_GT(p.noise_dist, 0.0);
}

INSTANTIATE_TEST_SUITE_P(Priors, RdoLossDecomposition, ::testing::Bool());

TEST(RdoLoss, ZeroNoiseReducesToRatePlusReconstruction) {
  ModelSpec spec = small_factorized_spec();
  TrainConfig cfg = small_config();
  Checkpoint ckpt = init_checkpoint(spec, cfg);
  Rng rng(6);
  Tensor batch = random_tensor(8, 6, rng, 0.0, 1.0);
  Tensor zero = Tensor::matrix(8, 2);
  Tape tape;
  LossResult res = rdo_loss(tape, spec, ckpt.params, batch, cfg, rng, &zero);
  EXPECT_EQ(res.parts.noise_dist, 0.0);
  EXPECT_NEAR(res.parts.total, res.parts.rate + cfg.lambda1 * res.parts.rec_h,
              1e-12 * std::abs(res.parts.total));
  // Per-sample h: the mean of log D differs from log of the mean D.
  EXPECT_LE(res.parts.rec_h, std::log(res.parts.rec) + 1e-12);
}

TEST(RdoLoss, NoiseShapeMismatchThrows) {
  ModelSpec spec = small_factorized_spec();
  TrainConfig cfg = small_config();
  Checkpoint ckpt = init_checkpoint(spec, cfg);
  Rng rng(7);
  Tensor batch = random_tensor(8, 6, rng, 0.0, 1.0);
  Tensor bad = Tensor::matrix(8, 3);
  Tape tape;
  EXPECT_THROW(rdo_loss(tape, spec, ckpt.params, batch, cfg, rng, &bad),
               ShapeError);
}

TEST(DagmmLoss, DecompositionAndPerfectReconstruction) {
  ModelSpec spec = small_gmm_spec();
  TrainConfig cfg = small_config(LossKind::kDagmm);
  cfg.lambda1 = 0.1;
  cfg.lambda2 = 0.005;
  Checkpoint ckpt = init_checkpoint(spec, cfg);
  Rng rng(8);
  Tensor batch = random_tensor(10, 6, rng, 0.0, 1.0);
  Tape tape;
  LossResult res = dagmm_loss(tape, spec, ckpt.params, batch, cfg);
  const LossParts& p = res.parts;
  EXPECT_NEAR(p.total, p.rec + 0.1 * p.rate + 0.005 * p.penalty,
              1e-12 * std::max(1.0, std::abs(p.total)));

  // A decoder that returns a constant row reconstructs that row exactly.
  zero_mlp(ckpt.params, spec.decoder);
  Tensor x_const = decode(ckpt, Tensor::matrix(1, 2));
  Tensor same = Tensor::matrix(10, 6);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 6; ++c) same(r, c) = x_const(0, c);
  }
  // Identical rows collapse the batch mixture; the ridge keeps it finite.
  Tape tape2;
  LossResult res2 = dagmm_loss(tape2, spec, ckpt.params, same, cfg);
  EXPECT_NEAR(res2.parts.rec, 0.0, 1e-24);
}

TEST(DagmmLoss, NeedsGmmPrior) {
  EXPECT_THROW(init_checkpoint(small_factorized_spec(),
                               small_config(LossKind::kDagmm)),
               ConfigError);
}

TEST(LossGradient, RdoMatchesFiniteDifferences) {
  for (bool gmm : {false, true}) {
    for (const char* h : {"log", "d"}) {
      ModelSpec spec = gmm ? small_gmm_spec() : small_factorized_spec();
      spec.h = parse_h(h);
      TrainConfig cfg = small_config();
      Checkpoint ckpt = init_checkpoint(spec, cfg);
      Rng rng(9);
      Tensor batch = random_tensor(6, 6, rng, 0.0, 1.0);
      Tensor eps = sample_noise(6, 2, 0.5, rng);
      auto graph = [&](Tape& tape, const ParamStore& p) {
        Rng unused(0);
        return rdo_loss(tape, spec, p, batch, cfg, unused, &eps).loss;
      };
      for (const auto& name : ckpt.params.names()) {
        EXPECT_LT(testing::param_gradient_error(graph, ckpt.params, name), 1e-4)
            << "prior " << (gmm ? "gmm" : "factorized") << " h " << h
            << " param " << name;
      }
    }
  }
}

TEST(LossGradient, DagmmMatchesFiniteDifferences) {
  ModelSpec spec = small_gmm_spec();
  TrainConfig cfg = small_config(LossKind::kDagmm);
  Checkpoint ckpt = init_checkpoint(spec, cfg);
  Rng rng(10);
  Tensor batch = random_tensor(8, 6, rng, 0.0, 1.0);
  auto graph = [&](Tape& tape, const ParamStore& p) {
    return dagmm_loss(tape, spec, p, batch, cfg).loss;
  };
  for (const auto& name : ckpt.params.names()) {
    EXPECT_LT(testing::param_gradient_error(graph, ckpt.params, name), 1e-4)
        << name;
  }
}

TEST(Train, ZeroEpochsReturnsInitialization) {
  ModelSpec spec = small_gmm_spec();
  TrainConfig cfg = small_config();
  cfg.epochs = 0;
  Rng rng(12);
  Tensor x = random_tensor(40, 6, rng, 0.0, 1.0);
  Checkpoint trained = train(x, spec, cfg);
  Checkpoint fresh = init_checkpoint(spec, cfg);
  EXPECT_TRUE(trained.params == fresh.params);
  EXPECT_EQ(trained.log.steps, 0u);
  EXPECT_TRUE(trained.gmm.has_value());
}

TEST(Train, SameSeedSameParameters) {
  ModelSpec spec = small_gmm_spec();
  TrainConfig cfg = small_config();
  Rng rng(13);
  Tensor x = random_tensor(50, 6, rng, 0.0, 1.0);
  Checkpoint a = train(x, spec, cfg);
  Checkpoint b = train(x, spec, cfg);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_EQ(a.log.epoch_loss, b.log.epoch_loss);
  cfg.seed = 12;
  Checkpoint c = train(x, spec, cfg);
  EXPECT_FALSE(a.params == c.params);
}

TEST(Train, LossDecreasesOnToyData) {
  Dataset ds = toy_generate(2000, 3);
  ModelSpec spec = mirrored_spec(16, {64, 32, 16}, 3, PriorKind::kGmm, {10}, 3);
  TrainConfig cfg;
  cfg.lambda1 = 1e3;
  cfg.lambda2 = 1e3;
  cfg.batch_size = 256;
  cfg.epochs = 10;
  cfg.seed = 5;
  Checkpoint ckpt = train(ds.x, spec, cfg);
  ASSERT_EQ(ckpt.log.epoch_loss.size(), 10u);
  EXPECT_LT(ckpt.log.epoch_loss.back(), ckpt.log.epoch_loss.front());
  EXPECT_EQ(ckpt.log.snapshot_loss.size(), 10u);
}

TEST(Train, SelectsLowestSnapshot) {
  ModelSpec spec = small_factorized_spec();
  TrainConfig cfg = small_config();
  cfg.epochs = 6;
  cfg.snapshots = 3;
  Rng rng(14);
  Tensor x = random_tensor(40, 6, rng, 0.0, 1.0);
  Checkpoint ckpt = train(x, spec, cfg);
  ASSERT_EQ(ckpt.log.snapshot_loss.size(), 3u);
  const auto& s = ckpt.log.snapshot_loss;
  const std::size_t best =
      std::min_element(s.begin(), s.end()) - s.begin();
  EXPECT_EQ(ckpt.log.selected_snapshot, best);
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  ModelSpec spec = small_gmm_spec();
  Rng rng(15);
  Tensor x = random_tensor(40, 6, rng, 0.0, 1.0);
  Checkpoint ckpt = train(x, spec, small_config());
  ckpt.norm = fit_minmax(x);
  const std::string a = temp_path("a.json");
  const std::string b = temp_path("b.json");
  checkpoint_save(ckpt, a);
  Checkpoint loaded = checkpoint_load(a);
  checkpoint_save(loaded, b);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_TRUE(loaded.params == ckpt.params);
  EXPECT_EQ(loaded.norm, ckpt.norm);
  EXPECT_EQ(encode(loaded, x), encode(ckpt, x));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST(Checkpoint, TamperedShapeNamesTensor) {
  Checkpoint ckpt = init_checkpoint(small_factorized_spec(), small_config());
  nlohmann::json j = checkpoint_to_json(ckpt);
  const std::string name = weight_name(ckpt.spec.decoder, 0);
  j["params"][name]["shape"] = {3, 5};
  j["params"][name]["values"] = std::vector<double>(15, 0.0);
  try {
    checkpoint_from_json(j);
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find(name), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, MissingPriorSectionFails) {
  Checkpoint ckpt = init_checkpoint(small_gmm_spec(), small_config());
  nlohmann::json j = checkpoint_to_json(ckpt);
  j.erase("prior");
  EXPECT_THROW(checkpoint_from_json(j), IoError);
}

TEST(Checkpoint, VersionMismatchAndCorruptFile) {
  Checkpoint ckpt = init_checkpoint(small_factorized_spec(), small_config());
  nlohmann::json j = checkpoint_to_json(ckpt);
  j["version"] = "rdoae-checkpoint-0";
  EXPECT_THROW(checkpoint_from_json(j), IoError);
  const std::string path = temp_path("corrupt.json");
  {
    std::ofstream out(path);
    out << "{\"version\": ";
  }
  EXPECT_THROW(checkpoint_load(path), IoError);
  std::filesystem::remove(path);
  EXPECT_THROW(checkpoint_load(temp_path("does_not_exist.json")), IoError);
}

TEST(Config, UnknownKeyRejected) {
  nlohmann::json j{{"lambda1", 2.0}, {"lamda2", 3.0}};
  EXPECT_THROW(config_from_json(j), ConfigError);
  TrainConfig cfg = config_from_json(nlohmann::json{{"lambda1", 2.0}});
  EXPECT_EQ(cfg.lambda1, 2.0);
}

TEST(Config, InvalidValuesRejected) {
  TrainConfig cfg;
  cfg.lambda1 = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.noise_halfwidth = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_loss("vae"), ConfigError);
  EXPECT_EQ(parse_loss("radogaga"), LossKind::kRdo);
}

}  // namespace
}  // namespace rdoae
