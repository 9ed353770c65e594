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

// rdoae command-line tool. Exit codes: 0 success, 2 configuration error,
// 3 numeric failure, 4 I/O failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rdoae/data.hpp"
#include "rdoae/error.hpp"
#include "rdoae/eval.hpp"
#include "rdoae/model.hpp"
#include "rdoae/presets.hpp"
#include "report.hpp"

namespace rdoae::cli {
namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kNumeric:
      return kExitNumeric;
    case ErrorKind::kIo:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

// ---------------------------------------------------------------------------
// Run configuration: preset defaults, then the --config file, then flags.
// ---------------------------------------------------------------------------

struct Flags {
  std::string config;
  std::string preset;
  std::string data;
  std::string format;
  std::string ckpt;
  std::string out;
  std::string csv;
  std::string svg;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  std::size_t pairs = 1000;
  std::size_t points = 100;
  double ratio = 0.0;
  double split = 0.5;
  double subsample = 1.0;
  std::string side = "decoder";
  std::string metric;
  std::string metric_noise;
  std::string h;
  std::string loss;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  double lr = 0.0;
  double norm = 0.01;
  double step = 1e-4;
  std::size_t dim = 0;
  std::size_t steps = 9;
  double span = 2.0;
  double sigma_x = 1.0;
  std::size_t n = 10000;
};

// Options that were given explicitly on the command line.
struct Given {
  std::set<std::string> names;
  bool has(const std::string& n) const { return names.count(n) > 0; }
};

struct RunConfig {
  Preset preset;
  std::string data;
  std::string format;
  LossKind loss = LossKind::kRdo;
  HKind h = parse_h("log");
  MetricSpec metric;
  std::optional<MetricSpec> metric_noise;
  TrainConfig train;
  std::size_t seeds = 1;
  double ratio = 0.0;
  double split = 0.5;
  double subsample = 1.0;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

const std::set<std::string> kConfigKeys = {
    "preset", "data",    "format", "loss",   "h",         "metric",
    "metric_noise", "seeds", "ratio",  "split", "subsample", "train",
    "hidden", "latent",  "en_hidden", "components", "side_features", "prior"};

RunConfig resolve(const Flags& f, const Given& given) {
  json file = json::object();
  if (!f.config.empty()) {
    file = read_json_file(f.config);
    if (!file.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      if (!kConfigKeys.count(it.key())) {
        throw ConfigError("config: unknown key '" + it.key() + "'");
      }
    }
  }
  RunConfig rc;
  try {
    std::string preset = file.value("preset", std::string("toy"));
    if (given.has("preset")) preset = f.preset;
    rc.preset = get_preset(preset);
    rc.ratio = rc.preset.ratio;

    if (file.contains("hidden")) {
      rc.preset.hidden = file["hidden"].get<std::vector<std::size_t>>();
    }
    if (file.contains("latent")) rc.preset.latent = file["latent"].get<std::size_t>();
    if (file.contains("en_hidden")) {
      rc.preset.en_hidden = file["en_hidden"].get<std::vector<std::size_t>>();
    }
    if (file.contains("components")) {
      rc.preset.components = file["components"].get<std::size_t>();
    }
    if (file.contains("side_features")) {
      rc.preset.side_features = file["side_features"].get<bool>();
    }
    if (file.contains("prior")) {
      rc.preset.prior = parse_prior(file["prior"].get<std::string>());
    }

    rc.data = file.value("data", std::string());
    rc.format = file.value("format", std::string());
    if (file.contains("loss")) rc.loss = parse_loss(file["loss"].get<std::string>());
    if (file.contains("h")) rc.h = parse_h(file["h"].get<std::string>());
    if (file.contains("metric")) {
      rc.metric = parse_metric(file["metric"].get<std::string>());
    }
    if (file.contains("metric_noise")) {
      rc.metric_noise = parse_metric(file["metric_noise"].get<std::string>());
    }
    rc.seeds = file.value("seeds", rc.seeds);
    rc.ratio = file.value("ratio", rc.ratio);
    rc.split = file.value("split", rc.split);
    rc.subsample = file.value("subsample", rc.subsample);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (given.has("data")) rc.data = f.data;
  if (given.has("format")) rc.format = f.format;
  if (given.has("loss")) rc.loss = parse_loss(f.loss);
  if (given.has("h")) rc.h = parse_h(f.h);
  if (given.has("metric")) rc.metric = parse_metric(f.metric);
  if (given.has("metric-noise")) rc.metric_noise = parse_metric(f.metric_noise);
  if (given.has("seeds")) rc.seeds = f.seeds;
  if (given.has("ratio")) rc.ratio = f.ratio;
  if (given.has("split")) rc.split = f.split;
  if (given.has("subsample")) rc.subsample = f.subsample;
  if (rc.loss == LossKind::kDagmm) rc.preset.prior = PriorKind::kGmm;

  rc.train = preset_config(rc.preset, rc.loss, rc.h);
  if (file.contains("train")) rc.train = config_from_json(file["train"], rc.train);
  // The loss named at top level wins over the train section.
  rc.train.loss = rc.loss;
  if (given.has("seed")) rc.train.seed = f.seed;
  if (given.has("lambda1")) rc.train.lambda1 = f.lambda1;
  if (given.has("lambda2")) rc.train.lambda2 = f.lambda2;
  if (given.has("epochs")) rc.train.epochs = f.epochs;
  if (given.has("batch-size")) rc.train.batch_size = f.batch_size;
  if (given.has("lr")) rc.train.lr = f.lr;
  rc.train.validate();
  if (rc.seeds == 0) throw ConfigError("--seeds must be >= 1");
  if (!(rc.ratio > 0.0 && rc.ratio < 1.0)) {
    throw ConfigError("ratio must be in (0, 1)");
  }
  if (!(rc.split > 0.0 && rc.split < 1.0)) {
    throw ConfigError("split must be in (0, 1)");
  }
  if (!(rc.subsample > 0.0 && rc.subsample <= 1.0)) {
    throw ConfigError("subsample must be in (0, 1]");
  }
  return rc;
}

ModelSpec build_spec(const RunConfig& rc, std::size_t input_dim) {
  ModelSpec spec = preset_spec(rc.preset, input_dim, rc.h, rc.metric);
  if (rc.metric_noise) spec.metric_noise = *rc.metric_noise;
  spec.validate();
  return spec;
}

// Dataset caches (with a JSON sidecar) load directly; raw CSVs need a format.
Dataset load_data(const std::string& path, const std::string& format,
                  std::uint64_t seed) {
  if (path.empty()) throw ConfigError("--data is required");
  if (format.empty()) {
    if (!std::filesystem::exists(path + ".json")) {
      throw ConfigError("'" + path +
                        "' has no dataset sidecar; pass --format "
                        "(thyroid, arrhythmia, kddcup, kddcup-rev)");
    }
    return load_dataset(path);
  }
  if (format == "kddcup-rev") {
    return make_kdd_rev(csv_ingest(path, csv_preset("kddcup")), seed);
  }
  return csv_ingest(path, csv_preset(format));
}

Dataset load_eval_data(const Flags& f, const Given& given) {
  return load_data(f.data, given.has("format") ? f.format : "", f.seed);
}

std::vector<double> to_vec(const Tensor& t) {
  return {t.values().begin(), t.values().end()};
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single value.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError(flag + " is required");
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

int cmd_toygen(const Flags& f) {
  require(f.out, "--out");
  if (f.n == 0) throw ConfigError("--n must be >= 1");
  ArtifactSet artifacts;
  artifacts.add(f.out);
  artifacts.add(f.out + ".json");
  save_dataset(toy_generate(f.n, f.seed), f.out);
  artifacts.commit();
  std::cout << "wrote " << f.n << " toy rows to " << f.out << "\n";
  return 0;
}

int cmd_train(const Flags& f, const Given& given) {
  require(f.out, "--out");
  RunConfig rc = resolve(f, given);
  Dataset ds = load_data(rc.data, rc.format, rc.train.seed);
  if (ds.has_labels()) {
    std::vector<std::size_t> normal;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (!ds.labels[i]) normal.push_back(i);
    }
    ds = ds.subset(normal);
  }
  ModelSpec spec = build_spec(rc, ds.x.cols());
  const std::size_t every = std::max<std::size_t>(1, rc.train.epochs / 10);
  ArtifactSet artifacts;
  artifacts.add(f.out);
  Checkpoint ckpt = train(ds.x, spec, rc.train, ds.norm,
                          [&](std::size_t epoch, double loss) {
                            if ((epoch + 1) % every == 0) {
                              std::cerr << "epoch " << epoch + 1 << "/"
                                        << rc.train.epochs << " loss " << loss
                                        << "\n";
                            }
                          });
  checkpoint_save(ckpt, f.out);
  artifacts.commit();
  std::cout << "saved checkpoint " << f.out << " (snapshot "
            << ckpt.log.selected_snapshot << ")\n";
  return 0;
}

int cmd_eval_pdf(const Flags& f, const Given& given) {
  require(f.ckpt, "--ckpt");
  require(f.out, "--out");
  const Checkpoint ckpt = checkpoint_load(f.ckpt);
  const Dataset ds = load_eval_data(f, given);
  const PdfReport rep = pdf_proportionality(ckpt, ds);
  ArtifactSet artifacts;
  json j{{"command", "eval-pdf"},
         {"rows", ds.size()},
         {"prior", prior_name(ckpt.spec.prior)},
         {"r", rep.r}};
  write_json(artifacts, f.out, j);
  if (!f.csv.empty()) {
    write_scatter_csv(artifacts, f.csv, "p_x", "p_z", rep.true_density,
                      rep.model_density);
  }
  if (!f.svg.empty()) {
    write_scatter_svg(artifacts, f.svg, "density proportionality", "P_x(x)",
                      "P_z(z)", rep.true_density, rep.model_density);
  }
  artifacts.commit();
  std::cout << "r = " << rep.r << "\n";
  return 0;
}

MetricSpec metric_for(const Flags& f, const Given& given,
                      const Checkpoint& ckpt) {
  return given.has("metric") ? parse_metric(f.metric) : ckpt.spec.metric_rec;
}

int cmd_eval_iso(const Flags& f, const Given& given) {
  require(f.ckpt, "--ckpt");
  require(f.out, "--out");
  const Checkpoint ckpt = checkpoint_load(f.ckpt);
  const Dataset ds = load_eval_data(f, given);
  const IsoSide side = parse_side(f.side);
  const MetricSpec metric = metric_for(f, given, ckpt);
  const IsometryReport rep = isometry_scan(ckpt.spec, ckpt.params, ds.x,
                                           metric, f.pairs, side, f.seed,
                                           f.norm);
  const double expected =
      1.0 / (2.0 * ckpt.config.lambda2 * ckpt.config.noise_variance());
  ArtifactSet artifacts;
  json j{{"command", "eval-iso"},
         {"side", side_name(side)},
         {"pairs", rep.pairs},
         {"metric", metric_name(metric)},
         {"seed", f.seed},
         {"norm", f.norm},
         {"r", rep.r},
         {"slope", rep.slope},
         {"expected_slope", expected}};
  write_json(artifacts, f.out, j);
  const std::string xn = side == IsoSide::kDecoder ? "vz_dot_wz" : "dfv_dot_dfw";
  if (!f.csv.empty()) {
    write_scatter_csv(artifacts, f.csv, xn, "vx_A_wx", rep.latent, rep.data);
  }
  if (!f.svg.empty()) {
    write_scatter_svg(artifacts, f.svg, "isometry (" + side_name(side) + ")",
                      xn, "vx A wx", rep.latent, rep.data);
  }
  artifacts.commit();
  std::cout << "r = " << rep.r << " slope = " << rep.slope
            << " expected = " << expected << "\n";
  return 0;
}

Tensor sample_latents(const Checkpoint& ckpt, const Tensor& x,
                      std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  auto perm = rng.permutation(x.rows());
  perm.resize(std::min(points, perm.size()));
  return encode(ckpt, x.select_rows(perm));
}

int cmd_eval_ortho(const Flags& f, const Given& given) {
  require(f.ckpt, "--ckpt");
  require(f.out, "--out");
  const Checkpoint ckpt = checkpoint_load(f.ckpt);
  const Dataset ds = load_eval_data(f, given);
  const MetricSpec metric = metric_for(f, given, ckpt);
  const Tensor z = sample_latents(ckpt, ds.x, f.points, f.seed);
  const OrthoReport rep = jacobian_orthonormality(
      ckpt.spec, ckpt.params, z, metric, ckpt.config.lambda2,
      ckpt.config.noise_variance(), f.step);
  ArtifactSet artifacts;
  json j{{"command", "eval-ortho"},
         {"points", rep.points},
         {"metric", metric_name(metric)},
         {"expected_scale", rep.expected_scale},
         {"diag_mean", rep.diag_mean},
         {"diag_cov", rep.diag_cov},
         {"offdiag_ratio", rep.offdiag_ratio},
         {"jsv_mean", rep.jsv_mean},
         {"jsv_cov", rep.jsv_cov},
         {"scaled_identity_metric", rep.scaled_identity_metric},
         {"point_diag_mean", rep.point_diag_mean},
         {"point_diag_cov", rep.point_diag_cov},
         {"point_offdiag_ratio", rep.point_offdiag_ratio},
         {"jsv", rep.jsv}};
  if (!rep.scaled_identity_metric) {
    j["note"] = "metric tensor is not a scaled identity; jsv is sqrt(det(J^T A J))";
  }
  write_json(artifacts, f.out, j);
  artifacts.commit();
  std::cout << "offdiag_ratio = " << rep.offdiag_ratio
            << " diag_cov = " << rep.diag_cov << " jsv_cov = " << rep.jsv_cov
            << " diag_mean = " << rep.diag_mean
            << " expected = " << rep.expected_scale << "\n";
  return 0;
}

std::string table_cell(const std::vector<double>& v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f (%.4f)", mean_of(v), std_of(v));
  return buf;
}

int cmd_anomaly(const Flags& f, const Given& given) {
  require(f.out, "--out");
  const RunConfig rc = resolve(f, given);
  if (rc.format.empty() && !std::filesystem::exists(rc.data + ".json")) {
    throw ConfigError("anomaly needs --format for raw CSV input");
  }
  Dataset full = load_data(rc.data, rc.format, rc.train.seed);
  if (!full.has_labels()) throw ConfigError("anomaly data has no labels");
  if (rc.subsample < 1.0) full = subsample(full, rc.subsample, rc.train.seed);
  const ModelSpec spec = build_spec(rc, full.x.cols());

  std::vector<double> ps, rs, fs;
  json runs = json::array();
  for (std::size_t k = 0; k < rc.seeds; ++k) {
    const std::uint64_t seed = rc.train.seed + k;
    auto [train_set, test_set] = split_train_test(full, rc.split, seed);
    TrainConfig cfg = rc.train;
    cfg.seed = seed;
    const Checkpoint ckpt = train(train_set.x, spec, cfg, full.norm);
    const std::vector<double> scores = anomaly_score(ckpt, test_set.x);
    const std::vector<int> flags = threshold_flags(scores, rc.ratio);
    const Prf prf = precision_recall_f1(flags, test_set.labels);
    double threshold = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (flags[i]) {
        flagged.push_back(i);
        threshold = std::min(threshold, scores[i]);
      }
    }
    ps.push_back(prf.precision);
    rs.push_back(prf.recall);
    fs.push_back(prf.f1);
    runs.push_back({{"seed", seed},
                    {"train_rows", train_set.size()},
                    {"test_rows", test_set.size()},
                    {"threshold", threshold},
                    {"precision", prf.precision},
                    {"recall", prf.recall},
                    {"f1", prf.f1},
                    {"tp", prf.tp},
                    {"fp", prf.fp},
                    {"fn", prf.fn},
                    {"flagged", flagged}});
    std::cerr << "seed " << seed << ": precision " << prf.precision
              << " recall " << prf.recall << " f1 " << prf.f1 << "\n";
  }
  const std::string method =
      rc.loss == LossKind::kDagmm ? "DAGMM" : "RaDOGAGA(" + h_name(rc.h) + ")";
  const std::string line = rc.preset.name + " " + method + " " +
                           table_cell(ps) + " " + table_cell(rs) + " " +
                           table_cell(fs);
  json j{{"command", "anomaly"},
         {"preset", rc.preset.name},
         {"method", method},
         {"loss", loss_name(rc.loss)},
         {"h", h_name(rc.h)},
         {"lambda1", rc.train.lambda1},
         {"lambda2", rc.train.lambda2},
         {"epochs", rc.train.epochs},
         {"ratio", rc.ratio},
         {"split", rc.split},
         {"subsample", rc.subsample},
         {"rows", full.size()},
         {"seeds", rc.seeds},
         {"precision", {{"mean", mean_of(ps)}, {"std", std_of(ps)}}},
         {"recall", {{"mean", mean_of(rs)}, {"std", std_of(rs)}}},
         {"f1", {{"mean", mean_of(fs)}, {"std", std_of(fs)}}},
         {"table", line},
         {"runs", runs}};
  ArtifactSet artifacts;
  write_json(artifacts, f.out, j);
  artifacts.commit();
  std::cout << "dataset method precision recall f1\n" << line << "\n";
  return 0;
}

int cmd_traverse(const Flags& f, const Given& given) {
  require(f.ckpt, "--ckpt");
  require(f.out, "--out");
  const Checkpoint ckpt = checkpoint_load(f.ckpt);
  const Dataset ds = load_eval_data(f, given);
  const LatentStats stats = latent_stats(ckpt, ds.x);
  const Traversal t =
      latent_traverse(ckpt.spec, ckpt.params, stats, f.dim, f.steps, f.span);
  Tensor joined = Tensor::matrix(t.z.rows(), t.z.cols() + t.decoded.cols());
  std::vector<std::string> header;
  for (std::size_t c = 0; c < t.z.cols(); ++c) header.push_back("z" + std::to_string(c));
  for (std::size_t c = 0; c < t.decoded.cols(); ++c) {
    header.push_back("x" + std::to_string(c));
  }
  for (std::size_t r = 0; r < joined.rows(); ++r) {
    for (std::size_t c = 0; c < t.z.cols(); ++c) joined(r, c) = t.z(r, c);
    for (std::size_t c = 0; c < t.decoded.cols(); ++c) {
      joined(r, t.z.cols() + c) = t.decoded(r, c);
    }
  }
  ArtifactSet artifacts;
  write_matrix_csv(artifacts, f.out, joined, header);
  artifacts.commit();
  std::cout << "wrote " << t.z.rows() << " traversal rows to " << f.out << "\n";
  return 0;
}

int cmd_latent_stats(const Flags& f, const Given& given) {
  require(f.ckpt, "--ckpt");
  require(f.out, "--out");
  const Checkpoint ckpt = checkpoint_load(f.ckpt);
  const Dataset ds = load_eval_data(f, given);
  const LatentStats s = latent_stats(ckpt, ds.x);
  std::vector<double> clamped;
  for (std::size_t d = 0; d < s.mean.size(); ++d) {
    clamped.push_back(clamped_reconstruction_error(ckpt.spec, ckpt.params,
                                                   ds.x, d, s.mean[d]));
  }
  json j{{"command", "latent-stats"},
         {"rows", ds.size()},
         {"mean", s.mean},
         {"variance", s.variance},
         {"order", s.order},
         {"top3_fraction", s.top_fraction(3)},
         {"reconstruction_error",
          reconstruction_error(ckpt.spec, ckpt.params, ds.x)},
         {"clamped_reconstruction_error", clamped}};
  ArtifactSet artifacts;
  write_json(artifacts, f.out, j);
  artifacts.commit();
  std::cout << "order:";
  for (std::size_t i : s.order) std::cout << " " << i;
  std::cout << "\ntop3_fraction = " << s.top_fraction(3) << "\n";
  return 0;
}

int cmd_lin1d(const Flags& f, const Given& given) {
  HKind h = parse_h(given.has("h") ? f.h : "log");
  const double l1 = given.has("lambda1") ? f.lambda1 : 10.0;
  const double l2 = given.has("lambda2") ? f.lambda2 : 0.5;
  const Lin1d closed = linear1d_solution(l1, l2, f.sigma_x, h);
  const Lin1d numeric = linear1d_minimize(l1, l2, f.sigma_x, h);
  std::cout << "closed:  a=" << closed.a << " b=" << closed.b
            << " ab=" << closed.ab << "\n"
            << "numeric: a=" << numeric.a << " b=" << numeric.b
            << " ab=" << numeric.ab << "\n";
  if (!f.out.empty()) {
    ArtifactSet artifacts;
    write_json(artifacts, f.out,
               json{{"command", "lin1d"},
                    {"h", h_name(h)},
                    {"lambda1", l1},
                    {"lambda2", l2},
                    {"sigma_x", f.sigma_x},
                    {"closed", {{"a", closed.a}, {"b", closed.b}, {"ab", closed.ab}}},
                    {"numeric",
                     {{"a", numeric.a}, {"b", numeric.b}, {"ab", numeric.ab}}},
                    {"ab_error", std::abs(closed.ab - numeric.ab)}});
    artifacts.commit();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Flag registration.
// ---------------------------------------------------------------------------

struct Registrar {
  CLI::App* app;
  Flags& f;
  std::vector<std::pair<std::string, CLI::Option*>> opts;

  template <typename T>
  Registrar& opt(const std::string& name, T& target, const std::string& help) {
    opts.emplace_back(name, app->add_option("--" + name, target, help));
    return *this;
  }
  Given given() const {
    Given g;
    for (const auto& [name, o] : opts) {
      if (o->count() > 0) g.names.insert(name);
    }
    return g;
  }
};

}  // namespace
}  // namespace rdoae::cli

int main(int argc, char** argv) {
  using namespace rdoae;
  using namespace rdoae::cli;

  CLI::App app{"Rate-distortion optimized autoencoders: training and audits"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  Flags f;
  std::vector<Registrar> regs;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* sc = app.add_subcommand(name, help);
    // "--h" names the reconstruction transform, so help is long-form only.
    sc->set_help_flag("--help", "Print this help message and exit");
    regs.push_back(Registrar{sc, f, {}});
    return &regs.back();
  };
  regs.reserve(16);

  auto* toygen = sub("toygen", "Generate the 3-source toy mixture dataset");
  toygen->opt("n", f.n, "Number of rows (default 10000)")
      .opt("seed", f.seed, "Generator seed")
      .opt("out", f.out, "Output CSV; a <out>.json sidecar is written too");

  auto add_run_flags = [&](Registrar* r) {
    r->opt("config", f.config, "JSON run configuration")
        .opt("preset", f.preset,
             "toy, toy-pca, thyroid, arrhythmia, kddcup, kddcup-rev")
        .opt("data", f.data, "Dataset cache or raw CSV")
        .opt("format", f.format,
             "Raw CSV layout: thyroid, arrhythmia, kddcup, kddcup-rev")
        .opt("seed", f.seed, "Run seed")
        .opt("loss", f.loss, "rdo or dagmm")
        .opt("h", f.h, "Reconstruction transform: d or log")
        .opt("metric", f.metric, "Distortion metric: mse, ssim or bce")
        .opt("metric-noise", f.metric_noise,
             "Metric of the noise term (defaults to --metric)")
        .opt("lambda1", f.lambda1, "Weight of the reconstruction term")
        .opt("lambda2", f.lambda2, "Weight of the noise (or penalty) term")
        .opt("epochs", f.epochs, "Training epochs")
        .opt("batch-size", f.batch_size, "Minibatch size")
        .opt("lr", f.lr, "Adam learning rate")
        .opt("out", f.out, "Output path");
  };
  auto* trainc = sub("train", "Train a model and write a checkpoint");
  add_run_flags(trainc);

  auto* anomaly = sub("anomaly", "Train on normal rows, score and threshold the test half");
  add_run_flags(anomaly);
  anomaly->opt("seeds", f.seeds, "Number of runs (seeds seed..seed+K-1)")
      .opt("ratio", f.ratio, "Fraction of test rows flagged (preset default)")
      .opt("split", f.split, "Train fraction (default 0.5)")
      .opt("subsample", f.subsample, "Row fraction kept before splitting");

  auto add_eval_flags = [&](Registrar* r) {
    r->opt("ckpt", f.ckpt, "Checkpoint")
        .opt("data", f.data, "Dataset cache or raw CSV")
        .opt("format", f.format,
             "Raw CSV layout: thyroid, arrhythmia, kddcup, kddcup-rev")
        .opt("out", f.out, "Output path");
  };
  auto* pdf = sub("eval-pdf", "Correlate true and model densities");
  add_eval_flags(pdf);
  pdf->opt("csv", f.csv, "Scatter CSV").opt("svg", f.svg, "Scatter SVG");

  auto* iso = sub("eval-iso", "Isometry scan over random tangent pairs");
  add_eval_flags(iso);
  iso->opt("pairs", f.pairs, "Number of tangent pairs (default 1000)")
      .opt("side", f.side, "decoder or encoder")
      .opt("seed", f.seed, "Pair seed")
      .opt("metric", f.metric, "Metric (defaults to the checkpoint's)")
      .opt("norm", f.norm, "Tangent norm (default 0.01)")
      .opt("csv", f.csv, "Scatter CSV")
      .opt("svg", f.svg, "Scatter SVG");

  auto* ortho = sub("eval-ortho", "Decoder Jacobian orthonormality audit");
  add_eval_flags(ortho);
  ortho->opt("points", f.points, "Latent points (default 100)")
      .opt("seed", f.seed, "Point sampling seed")
      .opt("metric", f.metric, "Metric (defaults to the checkpoint's)")
      .opt("step", f.step, "Central-difference step (default 1e-4)");

  auto* trav = sub("traverse", "Decode a sweep of one latent dimension");
  add_eval_flags(trav);
  trav->opt("dim", f.dim, "Latent dimension")
      .opt("steps", f.steps, "Number of decoded rows (default 9)")
      .opt("span", f.span, "Sweep half-width in std units (default 2)");

  auto* lstats = sub("latent-stats", "Latent moments, ordering and clamp errors");
  add_eval_flags(lstats);

  auto* lin = sub("lin1d", "Closed-form and numerical 1-D linear solutions");
  lin->opt("h", f.h, "d or log (default log)")
      .opt("lambda1", f.lambda1, "lambda1 (default 10)")
      .opt("lambda2", f.lambda2, "lambda2 (default 0.5)")
      .opt("sigma-x", f.sigma_x, "Input standard deviation (default 1)")
      .opt("out", f.out, "Optional JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (auto& r : regs) {
      if (!r.app->parsed()) continue;
      const std::string name = r.app->get_name();
      const Given g = r.given();
      if (name == "toygen") return cmd_toygen(f);
      if (name == "train") return cmd_train(f, g);
      if (name == "anomaly") return cmd_anomaly(f, g);
      if (name == "eval-pdf") return cmd_eval_pdf(f, g);
      if (name == "eval-iso") return cmd_eval_iso(f, g);
      if (name == "eval-ortho") return cmd_eval_ortho(f, g);
      if (name == "traverse") return cmd_traverse(f, g);
      if (name == "latent-stats") return cmd_latent_stats(f, g);
      if (name == "lin1d") return cmd_lin1d(f, g);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
