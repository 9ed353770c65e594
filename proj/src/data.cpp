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

#include "rdoae/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "rdoae/error.hpp"
#include "rdoae/rng.hpp"

namespace rdoae {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Normalization.
// ---------------------------------------------------------------------------

Tensor NormStats::apply(const Tensor& x) const {
  Tensor out = x;
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  switch (kind) {
    case Kind::kNone:
      return out;
    case Kind::kMinMax:
      if (min.size() != m || max.size() != m) {
        throw ShapeError("norm stats cover " + std::to_string(min.size()) +
                         " columns, data has " + std::to_string(m));
      }
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          const double range = max[c] - min[c];
          out(r, c) = range > 0.0 ? (x(r, c) - min[c]) / range : 0.0;
        }
      }
      return out;
    case Kind::kAffine:
      if (offset.size() != m) {
        throw ShapeError("norm stats cover " + std::to_string(offset.size()) +
                         " columns, data has " + std::to_string(m));
      }
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          out(r, c) = (x(r, c) - offset[c]) / scale;
        }
      }
      return out;
  }
  return out;
}

json norm_to_json(const NormStats& norm) {
  json j;
  switch (norm.kind) {
    case NormStats::Kind::kNone:
      j["kind"] = "none";
      break;
    case NormStats::Kind::kMinMax:
      j["kind"] = "minmax";
      j["min"] = norm.min;
      j["max"] = norm.max;
      break;
    case NormStats::Kind::kAffine:
      j["kind"] = "affine";
      j["offset"] = norm.offset;
      j["scale"] = norm.scale;
      break;
  }
  return j;
}

NormStats norm_from_json(const json& j) {
  NormStats norm;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    norm.kind = NormStats::Kind::kNone;
  } else if (kind == "minmax") {
    norm.kind = NormStats::Kind::kMinMax;
    norm.min = j.at("min").get<std::vector<double>>();
    norm.max = j.at("max").get<std::vector<double>>();
    if (norm.min.size() != norm.max.size()) {
      throw ShapeError("norm stats: min and max lengths differ");
    }
    for (std::size_t i = 0; i < norm.min.size(); ++i) {
      if (norm.max[i] < norm.min[i]) {
        throw DomainError("norm stats: max < min in column " +
                          std::to_string(i));
      }
    }
  } else if (kind == "affine") {
    norm.kind = NormStats::Kind::kAffine;
    norm.offset = j.at("offset").get<std::vector<double>>();
    norm.scale = j.at("scale").get<double>();
    if (!(norm.scale > 0.0)) throw DomainError("norm stats: scale must be > 0");
  } else {
    throw ConfigError("norm stats: unknown kind '" + kind + "'");
  }
  return norm;
}

NormStats fit_minmax(const Tensor& x) {
  NormStats norm;
  norm.kind = NormStats::Kind::kMinMax;
  const std::size_t m = x.cols();
  norm.min.assign(m, 0.0);
  norm.max.assign(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    double lo = x.rows() ? x(0, c) : 0.0;
    double hi = lo;
    for (std::size_t r = 1; r < x.rows(); ++r) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    norm.min[c] = lo;
    norm.max[c] = hi;
  }
  return norm;
}

NormStats fit_affine(const Tensor& x) {
  NormStats norm;
  norm.kind = NormStats::Kind::kAffine;
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  if (n == 0) throw ShapeError("fit_affine: empty data");
  norm.offset.assign(m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) norm.offset[c] += x(r, c);
  }
  for (double& v : norm.offset) v /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double d = x(r, c) - norm.offset[c];
      ss += d * d;
    }
  }
  norm.scale = std::sqrt(ss / static_cast<double>(n * m));
  if (!(norm.scale > 0.0)) norm.scale = 1.0;
  return norm;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.x = x.select_rows(rows);
  if (!labels.empty()) {
    for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  }
  if (source.size() > 0) out.source = source.select_rows(rows);
  if (!density.empty()) {
    for (std::size_t r : rows) out.density.push_back(density.at(r));
  }
  out.mixing = mixing;
  out.columns = columns;
  out.norm = norm;
  return out;
}

// ---------------------------------------------------------------------------
// Toy mixture.
// ---------------------------------------------------------------------------

namespace {

constexpr double kToyMeans[3][3] = {{0, 0, 0}, {15, 0, 0}, {15, 15, 15}};
constexpr double kToyVar[3] = {1.0, 2.0, 3.0};

}  // namespace

double toy_density(double s0, double s1, double s2) {
  const double s[3] = {s0, s1, s2};
  const double norm_const =
      std::pow(2.0 * std::numbers::pi, -1.5) /
      std::sqrt(kToyVar[0] * kToyVar[1] * kToyVar[2]);
  double total = 0.0;
  for (const auto& mean : kToyMeans) {
    double q = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double dev = s[d] - mean[d];
      q += dev * dev / kToyVar[d];
    }
    total += norm_const * std::exp(-0.5 * q) / 3.0;
  }
  return total;
}

Dataset toy_generate(std::size_t n, std::uint64_t seed, bool normalize) {
  if (n == 0) throw DomainError("toy_generate: n must be >= 1");
  Rng mix_rng = Rng::derive(seed, 0);
  Rng sample_rng = Rng::derive(seed, 1);
  Dataset ds;
  ds.mixing = Tensor::matrix(kToySources, kToyDim);
  for (double& v : ds.mixing.values()) v = mix_rng.uniform(-0.5, 0.5);
  ds.source = Tensor::matrix(n, kToySources);
  ds.x = Tensor::matrix(n, kToyDim);
  ds.density.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = sample_rng.below(3);
    for (std::size_t d = 0; d < kToySources; ++d) {
      ds.source(i, d) =
          kToyMeans[k][d] + std::sqrt(kToyVar[d]) * sample_rng.normal();
    }
    for (std::size_t m = 0; m < kToyDim; ++m) {
      double v = 0.0;
      for (std::size_t d = 0; d < kToySources; ++d) {
        v += ds.mixing(d, m) * ds.source(i, d);
      }
      ds.x(i, m) = v;
    }
    ds.density[i] = toy_density(ds.source(i, 0), ds.source(i, 1),
                                ds.source(i, 2));
  }
  for (std::size_t m = 0; m < kToyDim; ++m) {
    ds.columns.push_back("x" + std::to_string(m));
  }
  if (normalize) {
    ds.norm = fit_affine(ds.x);
    ds.x = ds.norm.apply(ds.x);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// CSV.
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  if (*begin == '+') ++begin;
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

std::string label_key(const std::string& raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

bool label_matches(const std::string& value, const std::string& target) {
  const std::string a = label_key(value);
  const std::string b = label_key(target);
  double x = 0.0, y = 0.0;
  if (parse_double(a, x) && parse_double(b, y)) return x == y;
  return a == b;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

}  // namespace

Dataset csv_ingest_text(const std::string& text, const CsvSpec& spec) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (header.empty() && spec.has_header) {
      header = cells;
      continue;
    }
    if (header.empty()) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        header.push_back("c" + std::to_string(c));
      }
    }
    if (cells.size() != header.size()) {
      throw IoError("csv line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " cells, found " +
                    std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw IoError("csv: no data rows");

  std::map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index[header[c]] = c;
  auto column_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw ConfigError("csv: unknown column '" + name + "'");
    return it->second;
  };

  std::vector<bool> is_cat(header.size(), false);
  std::vector<bool> skip(header.size(), false);
  for (const auto& name : spec.categorical) is_cat[column_of(name)] = true;
  for (const auto& name : spec.ignore) skip[column_of(name)] = true;
  std::size_t label_col = header.size();
  if (!spec.label_column.empty()) {
    label_col = column_of(spec.label_column);
    skip[label_col] = true;
  }

  // Output column layout.
  struct OutCol {
    std::size_t src;
    bool categorical;
    std::string value;
  };
  std::vector<OutCol> layout;
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (skip[c]) continue;
    if (is_cat[c]) {
      std::vector<std::string> seen;
      for (const auto& row : rows) {
        if (std::find(seen.begin(), seen.end(), row[c]) == seen.end()) {
          seen.push_back(row[c]);
        }
      }
      for (const auto& v : seen) {
        layout.push_back({c, true, v});
        ds.columns.push_back(header[c] + "=" + v);
      }
    } else {
      layout.push_back({c, false, ""});
      ds.columns.push_back(header[c]);
    }
  }

  // Missing numeric cells take the column mean of the present values.
  std::vector<double> means(header.size(), 0.0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (skip[c] || is_cat[c]) continue;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (is_missing(rows[r][c])) continue;
      double v = 0.0;
      if (!parse_double(rows[r][c], v)) {
        throw IoError("csv: unparseable cell '" + rows[r][c] + "' at row " +
                      std::to_string(r + 1) + ", column '" + header[c] + "'");
      }
      sum += v;
      ++count;
    }
    means[c] = count ? sum / static_cast<double>(count) : 0.0;
  }

  Tensor raw = Tensor::matrix(rows.size(), layout.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      const OutCol& oc = layout[j];
      const std::string& cell = rows[r][oc.src];
      if (oc.categorical) {
        raw(r, j) = cell == oc.value ? 1.0 : 0.0;
      } else if (is_missing(cell)) {
        raw(r, j) = means[oc.src];
      } else {
        double v = 0.0;
        parse_double(cell, v);
        raw(r, j) = v;
      }
    }
  }
  if (label_col < header.size()) {
    ds.labels.reserve(rows.size());
    for (const auto& row : rows) {
      int flag = 0;
      for (const auto& target : spec.anomaly_values) {
        if (label_matches(row[label_col], target)) flag = 1;
      }
      ds.labels.push_back(flag);
    }
  }
  ds.norm = fit_minmax(raw);
  ds.x = ds.norm.apply(raw);
  return ds;
}

Dataset csv_ingest(const std::string& path, const CsvSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return csv_ingest_text(buf.str(), spec);
}

CsvSpec csv_preset(const std::string& name) {
  CsvSpec spec;
  if (name == "thyroid") {
    // Last column holds the class; class 1 is hyperfunction.
    spec.label_column = "class";
    spec.anomaly_values = {"1"};
  } else if (name == "arrhythmia") {
    spec.label_column = "class";
    spec.anomaly_values = {"3", "4", "5", "7", "8", "9", "14", "15"};
  } else if (name == "kddcup") {
    // Raw kddcup.data_10_percent layout: no header, 41 features + label.
    spec.has_header = false;
    spec.categorical = {"c1", "c2", "c3", "c6", "c11", "c20", "c21"};
    spec.label_column = "c41";
    spec.anomaly_values = {"normal"};
  } else {
    throw ConfigError("unknown dataset preset '" + name +
                      "' (thyroid, arrhythmia, kddcup)");
  }
  return spec;
}

Dataset make_kdd_rev(const Dataset& kdd, std::uint64_t seed) {
  if (!kdd.has_labels()) throw ConfigError("make_kdd_rev needs labels");
  std::vector<std::size_t> normal, attack;
  for (std::size_t i = 0; i < kdd.size(); ++i) {
    (kdd.labels[i] == 1 ? normal : attack).push_back(i);
  }
  const std::size_t keep =
      std::min(attack.size(), static_cast<std::size_t>(std::llround(
                                  static_cast<double>(normal.size()) / 4.0)));
  Rng rng(seed);
  auto perm = rng.permutation(attack.size());
  std::vector<std::size_t> rows = normal;
  for (std::size_t i = 0; i < keep; ++i) rows.push_back(attack[perm[i]]);
  std::sort(rows.begin(), rows.end());
  Dataset out = kdd.subset(rows);
  for (int& l : out.labels) l = 1 - l;
  return out;
}

Dataset subsample(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("subsample fraction must be in (0, 1]");
  }
  const auto keep = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(ds.size())));
  Rng rng(seed);
  auto perm = rng.permutation(ds.size());
  std::vector<std::size_t> rows(perm.begin(), perm.begin() + keep);
  std::sort(rows.begin(), rows.end());
  return ds.subset(rows);
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double ratio,
                                             std::uint64_t seed) {
  if (!ds.has_labels()) throw ConfigError("split_train_test needs labels");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw DomainError("split ratio must be in (0, 1)");
  }
  Rng rng(seed);
  auto perm = rng.permutation(ds.size());
  const auto n_train =
      static_cast<std::size_t>(std::floor(ratio * static_cast<double>(ds.size())));
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (i < n_train) {
      if (ds.labels[perm[i]] == 0) train.push_back(perm[i]);
    } else {
      test.push_back(perm[i]);
    }
  }
  if (train.empty()) throw DomainError("split: no normal rows in the train half");
  return {ds.subset(train), ds.subset(test)};
}

// ---------------------------------------------------------------------------
// Side features.
// ---------------------------------------------------------------------------

namespace {

struct SideRow {
  double rel = 0.0;
  double cos = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  double nd = 0.0;
  double dot = 0.0;
};

SideRow side_row(std::span<const double> x, std::span<const double> y) {
  SideRow s;
  double xx = 0.0, yy = 0.0, dd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    yy += y[i] * y[i];
    s.dot += x[i] * y[i];
    dd += (x[i] - y[i]) * (x[i] - y[i]);
  }
  s.nx = std::sqrt(xx);
  s.ny = std::sqrt(yy);
  s.nd = std::sqrt(dd);
  s.rel = s.nx > 0.0 ? s.nd / s.nx : s.nd;
  s.cos = (s.nx > 0.0 && s.ny > 0.0) ? s.dot / (s.nx * s.ny) : 0.0;
  return s;
}

}  // namespace

std::pair<double, double> en_side_features(const Tensor& x, const Tensor& y) {
  if (x.size() != y.size()) throw ShapeError("side features: size mismatch");
  const SideRow s = side_row(x.values(), y.values());
  return {s.rel, s.cos};
}

Tensor en_side_features_rows(const Tensor& x, const Tensor& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError("side features: batch shapes differ");
  }
  Tensor out = Tensor::matrix(x.rows(), 2);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const SideRow s = side_row(x.row_span(r), y.row_span(r));
    out(r, 0) = s.rel;
    out(r, 1) = s.cos;
  }
  return out;
}

Var en_side_features_rows(Var x, Var y) {
  if (x.tape != y.tape) throw ShapeError("side features: different tapes");
  Tensor out = en_side_features_rows(x.value(), y.value());
  const std::size_t xid = x.id, yid = y.id;
  return x.tape->push(
      std::move(out), {xid, yid}, [xid, yid](Tape& t, std::size_t self) {
        const Tensor& g = t.upstream(self);
        const Tensor& xv = t.value(xid);
        const Tensor& yv = t.value(yid);
        Tensor dx = Tensor::matrix(xv.rows(), xv.cols());
        Tensor dy = Tensor::matrix(xv.rows(), xv.cols());
        for (std::size_t r = 0; r < xv.rows(); ++r) {
          auto xr = xv.row_span(r);
          auto yr = yv.row_span(r);
          const SideRow s = side_row(xr, yr);
          const double g_rel = g(r, 0);
          const double g_cos = g(r, 1);
          for (std::size_t i = 0; i < xr.size(); ++i) {
            const double d = xr[i] - yr[i];
            double rx = 0.0, ry = 0.0;
            if (s.nd > 0.0) {
              const double denom = s.nx > 0.0 ? s.nx : 1.0;
              rx = d / (s.nd * denom);
              ry = -rx;
            }
            if (s.nx > 0.0) rx -= s.nd * xr[i] / (s.nx * s.nx * s.nx);
            double cx = 0.0, cy = 0.0;
            if (s.nx > 0.0 && s.ny > 0.0) {
              cx = yr[i] / (s.nx * s.ny) - s.cos * xr[i] / (s.nx * s.nx);
              cy = xr[i] / (s.nx * s.ny) - s.cos * yr[i] / (s.ny * s.ny);
            }
            dx(r, i) = g_rel * rx + g_cos * cx;
            dy(r, i) = g_rel * ry + g_cos * cy;
          }
        }
        t.accumulate(xid, dx);
        t.accumulate(yid, dy);
      });
}

// ---------------------------------------------------------------------------
// Cache files.
// ---------------------------------------------------------------------------

namespace {

json tensor_json(const Tensor& t) {
  return json{{"shape", t.shape()}, {"values", t.storage()}};
}

Tensor tensor_from(const json& j) {
  return Tensor(j.at("shape").get<Shape>(),
                j.at("values").get<std::vector<double>>());
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream csv(path);
  if (!csv) throw IoError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    if (c) csv << ',';
    csv << ds.columns[c];
  }
  csv << '\n';
  char buf[32];
  for (std::size_t r = 0; r < ds.x.rows(); ++r) {
    for (std::size_t c = 0; c < ds.x.cols(); ++c) {
      if (c) csv << ',';
      auto res = std::to_chars(buf, buf + sizeof(buf), ds.x(r, c));
      csv.write(buf, res.ptr - buf);
    }
    csv << '\n';
  }
  if (!csv) throw IoError("write failed for '" + path + "'");

  json side;
  side["format"] = "rdoae-dataset-1";
  side["rows"] = ds.x.rows();
  side["cols"] = ds.x.cols();
  side["norm"] = norm_to_json(ds.norm);
  if (ds.has_labels()) side["labels"] = ds.labels;
  if (ds.mixing.size() > 0) side["mixing"] = tensor_json(ds.mixing);
  if (ds.source.size() > 0) side["source"] = tensor_json(ds.source);
  if (!ds.density.empty()) side["density"] = ds.density;
  std::ofstream js(path + ".json");
  if (!js) throw IoError("cannot write '" + path + ".json'");
  js << side.dump() << '\n';
  if (!js) throw IoError("write failed for '" + path + ".json'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw IoError("cannot open '" + path + ".json'");
  json side;
  try {
    js >> side;
  } catch (const json::exception& e) {
    throw IoError("corrupt dataset sidecar '" + path + ".json': " + e.what());
  }
  Dataset ds;
  try {
    if (side.at("format") != "rdoae-dataset-1") {
      throw ConfigError("unsupported dataset format in '" + path + ".json'");
    }
    ds.norm = norm_from_json(side.at("norm"));
    if (side.contains("labels")) ds.labels = side["labels"].get<std::vector<int>>();
    if (side.contains("mixing")) ds.mixing = tensor_from(side["mixing"]);
    if (side.contains("source")) ds.source = tensor_from(side["source"]);
    if (side.contains("density")) {
      ds.density = side["density"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw IoError("malformed dataset sidecar '" + path + ".json': " + e.what());
  }

  std::ifstream csv(path);
  if (!csv) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(csv, line)) throw IoError("empty dataset file '" + path + "'");
  ds.columns = split_csv_line(line);
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != ds.columns.size()) {
      throw IoError("dataset row " + std::to_string(rows + 1) + " has " +
                    std::to_string(cells.size()) + " cells");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw IoError("dataset cell at row " + std::to_string(rows + 1) +
                      ", column " + std::to_string(c) + " is not a number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  ds.x = Tensor({rows, ds.columns.size()}, std::move(values));
  const auto n = side.at("rows").get<std::size_t>();
  if (n != rows || (ds.has_labels() && ds.labels.size() != rows) ||
      (!ds.density.empty() && ds.density.size() != rows)) {
    throw IoError("dataset '" + path + "' row counts disagree with sidecar");
  }
  return ds;
}

}  // namespace rdoae
