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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion to
// stdout (and to acceptance_report.txt in the working directory); the
// details go to stderr. The exit status is 0 unless the run itself crashes.
//
// The anomaly criterion reads labeled CSVs from RDOAE_THYROID_CSV,
// RDOAE_ARRHYTHMIA_CSV and RDOAE_KDDCUP_CSV (the raw kddcup.data_10_percent
// file); it fails when they are not set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rdoae/data.hpp"
#include "rdoae/error.hpp"
#include "rdoae/eval.hpp"
#include "rdoae/metrics.hpp"
#include "rdoae/model.hpp"
#include "rdoae/presets.hpp"
#include "rdoae/priors.hpp"

namespace rdoae {
namespace {

constexpr std::uint64_t kToySeed = 7;

std::ofstream g_report;

void verdict(int id, bool pass, const std::string& summary) {
  std::ostringstream line;
  line << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " "
       << summary;
  std::cout << line.str() << std::endl;
  if (g_report) g_report << line.str() << std::endl;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Checkpoint train_logged(const std::string& tag, const Tensor& x,
                        const ModelSpec& spec, const TrainConfig& cfg,
                        const NormStats& norm = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t every = std::max<std::size_t>(1, cfg.epochs / 10);
  Checkpoint ckpt = train(x, spec, cfg, norm, [&](std::size_t e, double loss) {
    if ((e + 1) % every == 0) {
      std::cerr << "  [" << tag << "] epoch " << e + 1 << "/" << cfg.epochs
                << " loss " << loss << " (" << fmt(seconds_since(t0), 3)
                << " s)\n";
    }
  });
  return ckpt;
}

// ---------------------------------------------------------------------------
// 1. One-dimensional linear model against an independent minimizer.
// ---------------------------------------------------------------------------

// Coarse-to-fine grid over (ab, log b); ab is confined to [1/2, 2] because
// the loss is unbounded below as a -> 0.
double grid_ab(double lambda1, double lambda2, double sigma_x, const HKind& h) {
  double p_lo = 0.5, p_hi = 2.0;
  const double lb0 = -0.5 * std::log(2.0 * lambda2);
  double l_lo = lb0 - 4.0, l_hi = lb0 + 4.0;
  double best_p = 1.0, best_l = lb0;
  const int g = 61;
  for (int round = 0; round < 30; ++round) {
    double best = INFINITY;
    for (int i = 0; i < g; ++i) {
      const double p = p_lo + (p_hi - p_lo) * i / (g - 1);
      for (int j = 0; j < g; ++j) {
        const double lb = l_lo + (l_hi - l_lo) * j / (g - 1);
        const double b = std::exp(lb);
        const double v = linear1d_loss(p / b, b, lambda1, lambda2, sigma_x, h);
        if (v < best) {
          best = v;
          best_p = p;
          best_l = lb;
        }
      }
    }
    const double dp = 2.0 * (p_hi - p_lo) / (g - 1);
    const double dl = 2.0 * (l_hi - l_lo) / (g - 1);
    p_lo = std::max(0.5, best_p - dp);
    p_hi = std::min(2.0, best_p + dp);
    l_lo = best_l - dl;
    l_hi = best_l + dl;
  }
  return best_p;
}

void criterion_lin1d() {
  struct Case {
    const char* h;
    double c;  // lambda1 * sigma_x^2
  };
  double worst = 0.0;
  std::string detail;
  for (const Case& k : {Case{"log", 10.0}, Case{"d", 5.0}, Case{"d", 10.0},
                        Case{"d", 100.0}}) {
    const HKind h = parse_h(k.h);
    const Lin1d closed = linear1d_solution(k.c, 0.5, 1.0, h);
    const double grid = grid_ab(k.c, 0.5, 1.0, h);
    worst = std::max(worst, std::abs(closed.ab - grid));
    detail += std::string(" ") + k.h + "@" + fmt(k.c) + ":ab=" +
              fmt(closed.ab, 6) + "/" + fmt(grid, 6);
  }
  verdict(1, worst < 1e-3,
          "lin1d closed form vs grid search, max |d(ab)| = " + fmt(worst, 3) +
              " (< 1e-3);" + detail);
}

// ---------------------------------------------------------------------------
// 2-4. Toy models.
// ---------------------------------------------------------------------------

struct ToyModels {
  Dataset ds;
  Checkpoint rdo_log;
  Checkpoint rdo_d;
  Checkpoint dagmm;
};

Checkpoint train_toy(const Dataset& ds, const std::string& preset_name,
                     LossKind loss, const std::string& h_name,
                     std::uint64_t seed) {
  const Preset p = get_preset(preset_name);
  const HKind h = parse_h(h_name);
  ModelSpec spec = preset_spec(p, ds.x.cols(), h, MetricSpec{});
  TrainConfig cfg = preset_config(p, loss, h);
  cfg.seed = seed;
  const std::string tag = preset_name + " " + loss_name(loss) +
                          (loss == LossKind::kRdo ? "(" + h_name + ")" : "") +
                          " seed " + std::to_string(seed);
  return train_logged(tag, ds.x, spec, cfg, ds.norm);
}

void criterion_pdf(const ToyModels& m) {
  const double r_log = pdf_proportionality(m.rdo_log, m.ds).r;
  const double r_d = pdf_proportionality(m.rdo_d, m.ds).r;
  const double r_dagmm = pdf_proportionality(m.dagmm, m.ds).r;
  const bool pass = r_log >= 0.98 && r_d >= 0.98 && r_dagmm <= r_log - 0.05;
  verdict(2, pass,
          "toy density correlation r(log) = " + fmt(r_log) + " (>= 0.98), r(d) = " +
              fmt(r_d) + " (>= 0.98), r(dagmm) = " + fmt(r_dagmm) +
              " (<= r(log) - 0.05)");
}

void criterion_isometry(const ToyModels& m) {
  const Checkpoint& c = m.rdo_log;
  const MetricSpec mse;
  const IsometryReport dec = isometry_scan(c.spec, c.params, m.ds.x, mse, 1000,
                                           IsoSide::kDecoder, 101);
  const IsometryReport enc = isometry_scan(c.spec, c.params, m.ds.x, mse, 1000,
                                           IsoSide::kEncoder, 102);
  const double expected =
      1.0 / (2.0 * c.config.lambda2 * c.config.noise_variance());
  const double slope_err = std::abs(dec.slope - expected) / expected;
  const bool pass = dec.r >= 0.95 && enc.r >= 0.95 && slope_err <= 0.25;
  verdict(3, pass,
          "isometry decoder r = " + fmt(dec.r) + ", encoder r = " + fmt(enc.r) +
              " (>= 0.95), slope = " + fmt(dec.slope) + " vs " + fmt(expected) +
              " (within 25%: " + fmt(100.0 * slope_err, 3) + "%)");
}

void criterion_ortho(const ToyModels& m) {
  const Checkpoint& c = m.rdo_log;
  std::vector<std::size_t> rows;
  Rng rng(103);
  const auto perm = rng.permutation(m.ds.size());
  rows.assign(perm.begin(), perm.begin() + 100);
  const Tensor z = encode(c, m.ds.x.select_rows(rows));
  const OrthoReport rep = jacobian_orthonormality(
      c.spec, c.params, z, MetricSpec{}, c.config.lambda2,
      c.config.noise_variance());
  const bool pass =
      rep.offdiag_ratio < 0.1 && rep.diag_cov < 0.1 && rep.jsv_cov < 0.15;
  verdict(4, pass,
          "orthonormality off/diag = " + fmt(rep.offdiag_ratio) +
              " (< 0.1), diag CoV = " + fmt(rep.diag_cov) +
              " (< 0.1), J_sv CoV = " + fmt(rep.jsv_cov) +
              " (< 0.15); diag mean " + fmt(rep.diag_mean) + " vs " +
              fmt(rep.expected_scale));
}

// ---------------------------------------------------------------------------
// 5. Anomaly detection.
// ---------------------------------------------------------------------------

struct RunF1 {
  double f1 = 0.0;
  double seconds = 0.0;
};

RunF1 anomaly_run(const Dataset& full, const Preset& p, LossKind loss,
                  const HKind& h, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  auto [train_set, test_set] = split_train_test(full, 0.5, seed);
  const ModelSpec spec = preset_spec(p, full.x.cols(), h, MetricSpec{});
  TrainConfig cfg = preset_config(p, loss, h);
  cfg.seed = seed;
  const Checkpoint ckpt = train(train_set.x, spec, cfg, full.norm);
  const auto flags = threshold_flags(anomaly_score(ckpt, test_set.x), p.ratio);
  RunF1 out;
  out.f1 = precision_recall_f1(flags, test_set.labels).f1;
  out.seconds = seconds_since(t0);
  return out;
}

std::string env_path(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? "" : v;
}

// Mean F1 over 20 seeds with the preset's RDO(log) settings.
bool anomaly_table_entry(const std::string& name, const std::string& path,
                         double target, std::string& summary) {
  if (path.empty()) {
    summary += " " + name + ": no data;";
    return false;
  }
  const Dataset full = csv_ingest(path, csv_preset(name));
  const Preset p = get_preset(name);
  double sum = 0.0, slowest = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RunF1 r = anomaly_run(full, p, LossKind::kRdo, parse_h("log"), seed);
    std::cerr << "  [" << name << "] seed " << seed << " f1 " << r.f1 << " ("
              << fmt(r.seconds, 3) << " s)\n";
    sum += r.f1;
    slowest = std::max(slowest, r.seconds);
  }
  const double mean = sum / 20.0;
  summary += " " + name + ": mean F1 " + fmt(mean) + " vs " + fmt(target) +
             ", slowest run " + fmt(slowest, 3) + " s;";
  return std::abs(mean - target) <= 0.10 && slowest < 600.0;
}

void criterion_anomaly() {
  std::string summary;
  bool pass = anomaly_table_entry("thyroid", env_path("RDOAE_THYROID_CSV"),
                                  0.6702, summary);
  pass = anomaly_table_entry("arrhythmia", env_path("RDOAE_ARRHYTHMIA_CSV"),
                             0.5373, summary) &&
         pass;
  const std::string kdd = env_path("RDOAE_KDDCUP_CSV");
  if (kdd.empty()) {
    summary += " kddcup: no data;";
    pass = false;
  } else {
    const Dataset sub = subsample(csv_ingest(kdd, csv_preset("kddcup")), 0.1, 0);
    const Preset p = get_preset("kddcup");
    const RunF1 rdo = anomaly_run(sub, p, LossKind::kRdo, parse_h("log"), 0);
    const RunF1 base = anomaly_run(sub, p, LossKind::kDagmm, parse_h("log"), 0);
    summary += " kddcup 10%: F1 " + fmt(rdo.f1) + " vs baseline " +
               fmt(base.f1) + ";";
    pass = pass && rdo.f1 > base.f1;
  }
  verdict(5, pass,
          "anomaly detection (set RDOAE_THYROID_CSV, RDOAE_ARRHYTHMIA_CSV, "
          "RDOAE_KDDCUP_CSV):" + summary);
}

// ---------------------------------------------------------------------------
// 6. Quadratic forms of the metrics.
// ---------------------------------------------------------------------------

void criterion_quadratic() {
  Rng rng(104);
  std::string detail;
  bool pass = true;
  for (const char* name : {"mse", "ssim", "bce"}) {
    const MetricSpec m = parse_metric(name);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Tensor x = Tensor::matrix(1, 32);
      Tensor dx = Tensor::matrix(1, 32);
      double nx = 0.0, nd = 0.0;
      for (std::size_t i = 0; i < 32; ++i) {
        x[i] = rng.uniform(0.05, 0.95);
        dx[i] = rng.uniform(-1.0, 1.0);
        nx += x[i] * x[i];
        nd += dx[i] * dx[i];
      }
      const double s = 1e-3 * std::sqrt(nx / nd);
      Tensor y = x;
      for (std::size_t i = 0; i < 32; ++i) {
        dx[i] *= s;
        y[i] += dx[i];
      }
      const double inc = distance(m, x, y) - distance(m, x, x);
      const double q = quadratic_form(m, x, dx);
      worst = std::max(worst, std::abs(inc - q) / q);
    }
    pass = pass && worst < 0.01;
    detail += std::string(" ") + name + " " + fmt(worst, 3);
  }
  verdict(6, pass, "quadratic form max relative error (< 1%):" + detail);
}

// ---------------------------------------------------------------------------
// 7. Gradient suite.
// ---------------------------------------------------------------------------

Tensor uniform_tensor(std::size_t r, std::size_t c, Rng& rng, double lo,
                      double hi) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

using ParamGraph = std::function<Var(Tape&, const ParamStore&)>;

double param_error(const ParamGraph& graph, const ParamStore& params) {
  Tape tape;
  const Var loss = graph(tape, params);
  const GradMap g = tape.backward(loss, &params);
  double worst = 0.0;
  for (const auto& name : params.names()) {
    const Tensor fd = finite_difference_gradient(
        [&](const Tensor& v) {
          ParamStore copy = params;
          copy.set(name, v);
          Tape t;
          return graph(t, copy).value().item();
        },
        params.get(name), 1e-5);
    worst = std::max(worst, max_relative_error(g.at(name), fd, 1e-6));
  }
  return worst;
}

// Inputs enter the graph as a parameter named "input".
double input_error(const std::function<Var(Tape&, Var)>& graph,
                   const Tensor& x) {
  ParamStore p;
  p.add("input", x);
  return param_error(
      [&](Tape& tape, const ParamStore& ps) {
        return graph(tape, tape.param(ps, "input"));
      },
      p);
}

void criterion_gradients() {
  Rng rng(105);
  double worst = 0.0;
  std::string detail;
  auto note = [&](const std::string& what, double e) {
    worst = std::max(worst, e);
    detail += " " + what + " " + fmt(e, 2);
  };

  for (Activation act : {Activation::kNone, Activation::kTanh,
                         Activation::kSoftplus, Activation::kSigmoid,
                         Activation::kSoftmax}) {
    MlpSpec spec;
    spec.prefix = "act";
    spec.widths = {4, 3};
    spec.activations = {act};
    ParamStore p;
    mlp_init(p, spec, rng);
    p.add("input", uniform_tensor(5, 4, rng, -1.5, 1.5));
    const Tensor w = uniform_tensor(5, 3, rng, -1.0, 1.0);
    note(activation_name(act),
         param_error(
             [&](Tape& tape, const ParamStore& ps) {
               Var in = tape.param(ps, "input");
               Var out = mlp_forward(tape, ps, spec, in);
               return ad::sum_all(ad::mul(out, tape.constant(w)));
             },
             p));
  }

  {
    ModelSpec spec = mirrored_spec(6, {5}, 2, PriorKind::kGmm, {4}, 2, true);
    TrainConfig cfg;
    cfg.lambda1 = 10.0;
    cfg.lambda2 = 5.0;
    const Checkpoint ck = init_checkpoint(spec, cfg);
    const Tensor batch = uniform_tensor(8, 6, rng, 0.0, 1.0);
    const Tensor eps = sample_noise(8, 2, 0.5, rng);
    note("rdo-loss", param_error(
                         [&](Tape& tape, const ParamStore& ps) {
                           Rng unused(0);
                           return rdo_loss(tape, spec, ps, batch, cfg, unused,
                                           &eps)
                               .loss;
                         },
                         ck.params));
    TrainConfig dcfg = cfg;
    dcfg.loss = LossKind::kDagmm;
    dcfg.lambda1 = 0.1;
    dcfg.lambda2 = 0.005;
    note("dagmm-loss", param_error(
                           [&](Tape& tape, const ParamStore& ps) {
                             return dagmm_loss(tape, spec, ps, batch, dcfg).loss;
                           },
                           ck.params));
  }

  {
    FactorizedSpec fs;
    fs.dims = 3;
    ParamStore p;
    factorized_init(p, fs, 2.0, &rng);
    const Tensor z = uniform_tensor(6, 3, rng, -3.0, 3.0);
    auto graph = [&](Tape& tape, const ParamStore& ps, Var zv) {
      return ad::sum_all(factorized_logp_rows(tape, ps, fs, zv));
    };
    note("factorized-logp(z)",
         input_error([&](Tape& tape, Var zv) { return graph(tape, p, zv); }, z));
    note("factorized-logp(params)",
         param_error(
             [&](Tape& tape, const ParamStore& ps) {
               return graph(tape, ps, tape.constant(z));
             },
             p));
  }

  {
    const Tensor feats = uniform_tensor(20, 3, rng, -1.0, 1.0);
    Tensor gamma = uniform_tensor(20, 2, rng, 0.1, 1.0);
    for (std::size_t r = 0; r < 20; ++r) {
      const double s = gamma(r, 0) + gamma(r, 1);
      gamma(r, 0) /= s;
      gamma(r, 1) /= s;
    }
    const GmmParams g = gmm_fit_batch(gamma, feats);
    const Tensor q = uniform_tensor(5, 3, rng, -1.5, 1.5);
    note("gmm-energy(feat)",
         input_error(
             [&](Tape& tape, Var f) {
               return ad::sum_all(gmm_energy_rows(gmm_constant(tape, g), f));
             },
             q));
  }

  verdict(7, worst < 1e-4,
          "autodiff vs central differences, max relative error " +
              fmt(worst, 3) + " (< 1e-4):" + detail);
}

// ---------------------------------------------------------------------------
// 8. Variance ordering of an over-complete latent.
// ---------------------------------------------------------------------------

void criterion_pca(const Dataset& ds) {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Checkpoint c =
        train_toy(ds, "toy-pca", LossKind::kRdo, "log", seed);
    const LatentStats s = latent_stats(c, ds.x);
    const double top3 = s.top_fraction(3);
    const std::size_t hi = s.order.front();
    const std::size_t lo = s.order.back();
    const double base = reconstruction_error(c.spec, c.params, ds.x);
    const double e_lo =
        clamped_reconstruction_error(c.spec, c.params, ds.x, lo, s.mean[lo]) -
        base;
    const double e_hi =
        clamped_reconstruction_error(c.spec, c.params, ds.x, hi, s.mean[hi]) -
        base;
    const bool ok = top3 >= 0.9 && e_lo < e_hi;
    pass = pass && ok;
    detail += " seed " + std::to_string(seed) + ": top3 " + fmt(top3) +
              ", clamp low/high " + fmt(e_lo, 3) + "/" + fmt(e_hi, 3) + ";";
  }
  verdict(8, pass,
          "latent variance ordering over 5 seeds (top-3 share >= 0.9, "
          "low-variance clamp costs less):" + detail);
}

template <typename F>
void guarded(int id, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("error: ") + e.what());
  }
}

}  // namespace
}  // namespace rdoae

int main() {
  using namespace rdoae;
  g_report.open("acceptance_report.txt");
  const auto t0 = std::chrono::steady_clock::now();

  guarded(1, criterion_lin1d);
  guarded(6, criterion_quadratic);
  guarded(7, criterion_gradients);

  const Dataset toy = toy_generate(10000, kToySeed);
  bool toy_ok = true;
  ToyModels models;
  try {
    models.ds = toy;
    models.rdo_log = train_toy(toy, "toy", LossKind::kRdo, "log", 0);
    models.rdo_d = train_toy(toy, "toy", LossKind::kRdo, "d", 0);
    models.dagmm = train_toy(toy, "toy", LossKind::kDagmm, "log", 0);
  } catch (const std::exception& e) {
    toy_ok = false;
    for (int id : {2, 3, 4}) {
      verdict(id, false, std::string("toy training failed: ") + e.what());
    }
  }
  if (toy_ok) {
    guarded(2, [&] { criterion_pdf(models); });
    guarded(3, [&] { criterion_isometry(models); });
    guarded(4, [&] { criterion_ortho(models); });
  }
  guarded(8, [&] { criterion_pca(toy); });
  guarded(5, criterion_anomaly);

  std::cerr << "total " << fmt(seconds_since(t0), 4) << " s\n";
  return 0;
}
