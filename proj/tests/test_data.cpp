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
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "rdoae/data.hpp"
#include "rdoae/error.hpp"
#include "test_util.hpp"

namespace rdoae {
namespace {

using testing::random_tensor;

Dataset labeled(std::vector<int> labels) {
  Dataset ds;
  ds.x = Tensor::matrix(labels.size(), 2);
  for (std::size_t i = 0; i < labels.size(); ++i) ds.x(i, 0) = double(i);
  ds.labels = std::move(labels);
  return ds;
}

TEST(Toy, Shapes) {
  Dataset ds = toy_generate(500, 1);
  EXPECT_EQ(ds.x.rows(), 500u);
  EXPECT_EQ(ds.x.cols(), 16u);
  EXPECT_EQ(ds.source.rows(), 500u);
  EXPECT_EQ(ds.source.cols(), 3u);
  EXPECT_EQ(ds.mixing.rows(), 3u);
  EXPECT_EQ(ds.mixing.cols(), 16u);
  EXPECT_EQ(ds.density.size(), 500u);
  for (double u : ds.mixing.values()) {
    EXPECT_GE(u, -0.5);
    EXPECT_LT(u, 0.5);
  }
}

TEST(Toy, DensityAtOrigin) {
  const double first =
      (1.0 / 3.0) * std::pow(2.0 * std::numbers::pi, -1.5) / std::sqrt(6.0);
  EXPECT_NEAR(toy_density(0, 0, 0), 8.64e-3, 5e-6);
  // The far components are negligible.
  EXPECT_NEAR(toy_density(0, 0, 0) / first, 1.0, 1e-12);
}

TEST(Toy, DensityMatchesRecordedSources) {
  Dataset ds = toy_generate(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_DOUBLE_EQ(ds.density[i], toy_density(ds.source(i, 0),
                                                 ds.source(i, 1),
                                                 ds.source(i, 2)));
  }
}

TEST(Toy, RawDataIsMixedSources) {
  Dataset ds = toy_generate(20, 3, false);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t m = 0; m < 16; ++m) {
      double v = 0.0;
      for (std::size_t d = 0; d < 3; ++d) v += ds.mixing(d, m) * ds.source(i, d);
      EXPECT_NEAR(ds.x(i, m), v, 1e-12);
    }
  }
}

TEST(Toy, ComponentMoments) {
  Dataset ds = toy_generate(10000, 4);
  const double mu[3][3] = {{0, 0, 0}, {15, 0, 0}, {15, 15, 15}};
  double sum[3][3] = {};
  double sq[3][3] = {};
  std::size_t count[3] = {};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < 3; ++k) {
      double d = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        d += std::pow(ds.source(i, j) - mu[k][j], 2);
      }
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    ++count[best];
    for (std::size_t j = 0; j < 3; ++j) {
      sum[best][j] += ds.source(i, j);
      sq[best][j] += std::pow(ds.source(i, j) - mu[best][j], 2);
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NEAR(count[k] / 10000.0, 1.0 / 3.0, 0.03);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(sum[k][j] / count[k], mu[k][j], 0.15) << k << "," << j;
      EXPECT_NEAR(sq[k][j] / count[k], j + 1.0, 0.25) << k << "," << j;
    }
  }
}

TEST(Toy, DeterministicPerSeed) {
  Dataset a = toy_generate(100, 9);
  Dataset b = toy_generate(100, 9);
  Dataset c = toy_generate(100, 10);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.density, b.density);
  EXPECT_FALSE(a.x == c.x);
}

TEST(Toy, NormalizedWithRecordedAffineMap) {
  Dataset raw = toy_generate(300, 5, false);
  Dataset ds = toy_generate(300, 5);
  EXPECT_EQ(ds.norm.kind, NormStats::Kind::kAffine);
  EXPECT_EQ(ds.norm.apply(raw.x), ds.x);
}

TEST(Csv, MinMaxColumn) {
  Dataset ds = csv_ingest_text("a,b\n0,7\n5,7\n10,7\n", CsvSpec{});
  ASSERT_EQ(ds.x.cols(), 2u);
  EXPECT_DOUBLE_EQ(ds.x(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(ds.x(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(ds.x(2, 0), 1.0);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(ds.x(r, 1), 0.0);
  EXPECT_FALSE(ds.has_labels());
}

TEST(Csv, OneHotAndLabels) {
  CsvSpec spec;
  spec.categorical = {"proto"};
  spec.label_column = "y";
  spec.anomaly_values = {"bad"};
  Dataset ds = csv_ingest_text(
      "v,proto,y\n1,tcp,ok.\n2,udp,bad.\n3,tcp,ok\n4,icmp,bad\n", spec);
  EXPECT_EQ(ds.columns,
            (std::vector<std::string>{"v", "proto=tcp", "proto=udp",
                                      "proto=icmp"}));
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(ds.x(r, 1) + ds.x(r, 2) + ds.x(r, 3), 1.0);
  }
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 0, 1}));
}

TEST(Csv, NumericLabelsAndMissingCells) {
  CsvSpec spec = csv_preset("arrhythmia");
  Dataset ds =
      csv_ingest_text("f,class\n1,1\n?,3\n5,14\n3,16\n", spec);
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 1, 0}));
  // The missing value takes the column mean 3, which normalizes to 0.5.
  EXPECT_DOUBLE_EQ(ds.x(1, 0), 0.5);
}

TEST(Csv, ErrorsNameRowAndColumn) {
  try {
    csv_ingest_text("a,b\n1,2\n3,x7\n", CsvSpec{});
    FAIL() << "expected an error";
  } catch (const IoError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
  }
  EXPECT_THROW(csv_ingest_text("a,b\n1,2,3\n", CsvSpec{}), IoError);
  CsvSpec spec;
  spec.label_column = "nope";
  EXPECT_THROW(csv_ingest_text("a,b\n1,2\n", spec), ConfigError);
  EXPECT_THROW(csv_ingest(std::filesystem::temp_directory_path() /
                              "rdoae_missing_file.csv",
                          spec),
               IoError);
}

// KDD-like rows: 34 continuous columns plus categoricals with the cardinalities
// of the 10% file (3 protocols, 66 services, 11 flags, 2/2/1/2 binaries).
TEST(Csv, KddLayoutHas121Features) {
  std::ostringstream csv;
  Rng rng(6);
  const std::size_t rows = 200;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < 41; ++c) {
      switch (c) {
        case 1: csv << "p" << r % 3; break;
        case 2: csv << "s" << r % 66; break;
        case 3: csv << "f" << r % 11; break;
        case 6: csv << r % 2; break;
        case 11: csv << (r / 2) % 2; break;
        case 20: csv << 0; break;
        case 21: csv << (r / 3) % 2; break;
        default: csv << rng.uniform(0.0, 100.0);
      }
      csv << ",";
    }
    csv << (r % 5 == 0 ? "normal." : "smurf.") << "\n";
  }
  Dataset ds = csv_ingest_text(csv.str(), csv_preset("kddcup"));
  EXPECT_EQ(ds.x.cols(), 121u);
  EXPECT_EQ(ds.size(), rows);
  std::size_t anomalies = 0;
  for (int l : ds.labels) anomalies += l;
  EXPECT_EQ(anomalies, rows / 5);
  for (double v : ds.x.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }

  Dataset rev = make_kdd_rev(ds, 1);
  std::size_t rev_anom = 0;
  for (int l : rev.labels) rev_anom += l;
  EXPECT_EQ(rev.size(), 50u);
  EXPECT_EQ(rev_anom, 10u);
}

TEST(Split, Examples) {
  auto [train, test] = split_train_test(labeled({0, 0, 0, 0}), 0.5, 1);
  EXPECT_EQ(train.size(), 2u);
  EXPECT_EQ(test.size(), 2u);
  auto [train5, test5] = split_train_test(labeled({0, 0, 0, 0, 0}), 0.5, 1);
  EXPECT_EQ(train5.size(), 2u);
  EXPECT_EQ(test5.size(), 3u);
  Dataset mixed = labeled({0, 1, 0, 1, 0, 1, 0, 1, 0, 0});
  auto [tr, te] = split_train_test(mixed, 0.5, 3);
  for (int l : tr.labels) EXPECT_EQ(l, 0);
  EXPECT_EQ(te.size(), 5u);
  EXPECT_THROW(split_train_test(labeled({1, 1, 1, 1}), 0.5, 1), DomainError);
}

TEST(Split, DeterministicAndDistinctAcrossSeeds) {
  Dataset ds = labeled(std::vector<int>(40, 0));
  std::set<std::vector<double>> partitions;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto a = split_train_test(ds, 0.5, seed);
    auto b = split_train_test(ds, 0.5, seed);
    EXPECT_EQ(a.first.x, b.first.x);
    EXPECT_EQ(a.second.x, b.second.x);
    std::vector<double> ids;
    for (std::size_t r = 0; r < a.first.size(); ++r) ids.push_back(a.first.x(r, 0));
    partitions.insert(ids);
  }
  EXPECT_EQ(partitions.size(), 20u);
}

TEST(Subsample, FractionAndOrder) {
  Dataset ds = labeled(std::vector<int>(50, 0));
  Dataset s = subsample(ds, 0.1, 4);
  EXPECT_EQ(s.size(), 5u);
  for (std::size_t r = 1; r < s.size(); ++r) EXPECT_LT(s.x(r - 1, 0), s.x(r, 0));
  EXPECT_THROW(subsample(ds, 0.0, 4), DomainError);
}

TEST(SideFeatures, Examples) {
  auto [rel0, cos0] = en_side_features(Tensor::row({1.0, 2.0}), Tensor::row({1.0, 2.0}));
  EXPECT_DOUBLE_EQ(rel0, 0.0);
  EXPECT_NEAR(cos0, 1.0, 1e-15);
  auto [rel1, cos1] = en_side_features(Tensor::row({3.0, 4.0}), Tensor::row({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(rel1, 1.0);
  EXPECT_EQ(cos1, 0.0);
  auto [rel2, cos2] = en_side_features(Tensor::row({1.0, 0.0}), Tensor::row({0.0, 1.0}));
  EXPECT_NEAR(rel2, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(cos2, 0.0);
}

TEST(SideFeatures, RowsMatchScalarAndGradients) {
  Rng rng(7);
  Tensor x = random_tensor(5, 4, rng);
  Tensor y = random_tensor(5, 4, rng);
  Tensor rows = en_side_features_rows(x, y);
  for (std::size_t r = 0; r < 5; ++r) {
    auto [rel, cos] = en_side_features(x.row_copy(r), y.row_copy(r));
    EXPECT_NEAR(rows(r, 0), rel, 1e-14);
    EXPECT_NEAR(rows(r, 1), cos, 1e-14);
  }
  Tensor w = random_tensor(5, 2, rng);
  auto graph = [&](Tape& tape, Var in) {
    Var f = en_side_features_rows(in, tape.constant(y));
    return ad::sum_all(ad::mul(f, tape.constant(w)));
  };
  EXPECT_LT(testing::gradient_error(graph, x), 1e-4);
}

TEST(Normalization, Idempotent) {
  Rng rng(8);
  Tensor raw = random_tensor(30, 4, rng, -5.0, 9.0);
  NormStats mm = fit_minmax(raw);
  Tensor once = mm.apply(raw);
  NormStats again = fit_minmax(once);
  EXPECT_EQ(again.apply(once), once);
  NormStats af = fit_affine(raw);
  Tensor a1 = af.apply(raw);
  Tensor a2 = fit_affine(a1).apply(a1);
  for (std::size_t i = 0; i < a1.size(); ++i) EXPECT_NEAR(a2[i], a1[i], 1e-12);
  EXPECT_THROW(mm.apply(Tensor::matrix(2, 3)), ShapeError);
}

TEST(Normalization, JsonRoundTrip) {
  Rng rng(9);
  NormStats mm = fit_minmax(random_tensor(10, 3, rng));
  EXPECT_EQ(norm_from_json(norm_to_json(mm)), mm);
  NormStats af = fit_affine(random_tensor(10, 3, rng));
  EXPECT_EQ(norm_from_json(norm_to_json(af)), af);
}

TEST(Cache, RoundTrip) {
  const std::string path =
      (std::filesystem::temp_directory_path() / "rdoae_test_cache.csv").string();
  Dataset ds = toy_generate(64, 11);
  save_dataset(ds, path);
  Dataset back = load_dataset(path);
  EXPECT_EQ(back.x, ds.x);
  EXPECT_EQ(back.source, ds.source);
  EXPECT_EQ(back.density, ds.density);
  EXPECT_EQ(back.mixing, ds.mixing);
  EXPECT_EQ(back.norm, ds.norm);

  Dataset lab = labeled({0, 1, 0});
  lab.columns = {"a", "b"};
  save_dataset(lab, path);
  Dataset lab_back = load_dataset(path);
  EXPECT_EQ(lab_back.labels, lab.labels);
  EXPECT_EQ(lab_back.columns, lab.columns);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
  EXPECT_THROW(load_dataset(path), IoError);
}

}  // namespace
}  // namespace rdoae
