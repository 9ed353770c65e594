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

// Datasets: the 3-source toy mixture, CSV ingestion with one-hot encoding and
// max-min scaling, train/test splits, and reconstruction side features.

#ifndef RDOAE_DATA_HPP_
#define RDOAE_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdoae/tape.hpp"
#include "rdoae/tensor.hpp"

namespace rdoae {

// kMinMax: x' = (x - min) / (max - min), with 0/0 defined as 0.
// kAffine: x' = (x - offset) / scale, one scale for every column.
struct NormStats {
  enum class Kind { kNone, kMinMax, kAffine };

  Kind kind = Kind::kNone;
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> offset;
  double scale = 1.0;

  Tensor apply(const Tensor& x) const;
  bool operator==(const NormStats& other) const = default;
};

nlohmann::json norm_to_json(const NormStats& norm);
NormStats norm_from_json(const nlohmann::json& j);

NormStats fit_minmax(const Tensor& x);
// Column means as offset, root-mean-square of the centred values as scale.
NormStats fit_affine(const Tensor& x);

struct Dataset {
  Tensor x;                          // n x M
  std::vector<int> labels;           // 1 = anomaly; empty when unlabeled
  Tensor source;                     // n x 3 for toy data, else empty
  std::vector<double> density;       // true P_x per row for toy data
  Tensor mixing;                     // 3 x 16 for toy data, else empty
  std::vector<std::string> columns;  // feature names after encoding
  NormStats norm;

  std::size_t size() const { return x.rows(); }
  bool has_labels() const { return !labels.empty(); }
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

// ---------------------------------------------------------------------------
// Toy mixture: s ~ (1/3) sum_k N(mu_k, diag(1, 2, 3)) with means (0,0,0),
// (15,0,0), (15,15,15); x = u^T s with one u ~ U(-1/2, 1/2)^{3 x 16} per
// run; the density of x is recorded as the density of s.
// ---------------------------------------------------------------------------

constexpr std::size_t kToySources = 3;
constexpr std::size_t kToyDim = 16;

double toy_density(double s0, double s1, double s2);
// When `normalize` is set, x is mapped with fit_affine and the stats are kept.
Dataset toy_generate(std::size_t n, std::uint64_t seed, bool normalize = true);

// ---------------------------------------------------------------------------
// CSV ingestion.
// ---------------------------------------------------------------------------

struct CsvSpec {
  std::vector<std::string> categorical;
  std::vector<std::string> ignore;
  // Empty for unlabeled data.
  std::string label_column;
  // Label values (compared after trimming whitespace and a trailing '.';
  // numeric values compare numerically) that mark a row as an anomaly.
  std::vector<std::string> anomaly_values;
  bool has_header = true;
};

// Reads, one-hot encodes categoricals (columns "<name>=<value>", values in
// order of first appearance), max-min normalizes every column over the full
// file, and derives binary labels.
Dataset csv_ingest(const std::string& path, const CsvSpec& spec);
Dataset csv_ingest_text(const std::string& text, const CsvSpec& spec);

// Named presets: "thyroid", "arrhythmia", "kddcup".
CsvSpec csv_preset(const std::string& name);

// Keeps every "normal" row (label 1 under the kddcup preset), subsamples the
// attack rows so that they make up 20% of the result, and flips the labels so
// attacks are the anomalies.
Dataset make_kdd_rev(const Dataset& kdd, std::uint64_t seed);

// Seeded row subsample (without replacement), order preserved.
Dataset subsample(const Dataset& ds, double fraction, std::uint64_t seed);

// Random permutation; the first floor(ratio * n) rows form the training half
// with anomalies removed, the remainder is the test half with labels kept.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double ratio,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Side features: relative distance |x - y| / |x| and cosine similarity.
// |x| = 0 gives relative distance |x - y|; a zero vector gives cosine 0.
// ---------------------------------------------------------------------------

std::pair<double, double> en_side_features(const Tensor& x, const Tensor& y);
// Row-wise, L x 2.
Tensor en_side_features_rows(const Tensor& x, const Tensor& y);
Var en_side_features_rows(Var x, Var y);

// ---------------------------------------------------------------------------
// Cache format: "<path>" holds the feature matrix as CSV with a header of
// column names; "<path>.json" holds labels, norm stats, the mixing matrix,
// sources and densities.
// ---------------------------------------------------------------------------

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace rdoae

#endif  // RDOAE_DATA_HPP_
