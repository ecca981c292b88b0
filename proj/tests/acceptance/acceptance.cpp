// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Usage: acceptance [--work-dir DIR] [--only N[,N...]]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nfsgvb/baselines.hpp"
#include "nfsgvb/channel_model.hpp"
#include "nfsgvb/config.hpp"
#include "nfsgvb/evaluation.hpp"
#include "nfsgvb/harness.hpp"
#include "nfsgvb/math_kernels.hpp"
#include "nfsgvb/rng.hpp"
#include "nfsgvb/sgvb.hpp"
#include "oracles.hpp"

using namespace nfsgvb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::filesystem::path g_work = "acceptance_work";

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const SummaryRow& row_for(const SweepResult& res, double value, EstimatorKind kind) {
  for (const SummaryRow& r : res.summary) {
    if (r.sweep_value == value && r.estimator == kind) return r;
  }
  throw std::runtime_error("summary row missing");
}

ExperimentConfig preset(const std::string& name, const std::string& extra) {
  ExperimentConfig cfg = parse_config("defaults " + name + "\n" + extra, name);
  cfg.codebook_cache = true;
  cfg.codebook_cache_dir = (g_work / "cache").string();
  cfg.workers = 0;
  return cfg;
}

// Shared by criteria 1 and 2. Both anchors are ratios of expected energies, so they are compared
// with the pooled estimate sum ||h - h_hat||^2 / sum ||h||^2.
const SweepResult& anchor_sweep(double* elapsed) {
  static SweepResult res;
  static double secs = -1.0;
  if (secs < 0.0) {
    const ExperimentConfig cfg = preset("ula-table2",
                                        "sweep.values = 0, 10, 20, 30\n"
                                        "estimators.enabled = ls, oracle_ls\n"
                                        "trials = 200\n");
    const auto t0 = std::chrono::steady_clock::now();
    res = run_sweep(cfg);
    secs = seconds_since(t0);
  }
  *elapsed = secs;
  return res;
}

// Monte-Carlo check of the closed form E||P n||^2 = L N0 with an independent QR projection.
double projection_energy_ratio() {
  const ArrayGeometry geom = ArrayGeometry::ula(256, 100e9);
  SceneConfig sc;
  sc.l_paths = 6;
  sc.r_min = 3.0;
  sc.r_max = 90.0;
  double acc = 0.0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    const Scene scene = generate_scene(geom, sc, 90000 + t);
    Eigen::MatrixXcd b(256, 6);
    for (int l = 0; l < 6; ++l) b.col(l) = steering_vector(geom, scene.scatterers[l], ChannelMode::Exact);
    const CVec n = add_noise(CVec::Zero(256), 6.0, 6, 90000 + t).y;  // N0 = 1
    acc += oracle::projection(b, n).squaredNorm() / 6.0;
  }
  return acc / trials;
}

Outcome criterion_oracle_ls() {
  double secs = 0.0;
  const SweepResult& res = anchor_sweep(&secs);
  const double mc = projection_energy_ratio();
  Outcome out{true, ""};
  out.pass = std::abs(mc - 1.0) < 0.05;
  out.detail = "projected-noise MC ratio " + num(mc, 3) + ";";
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    const double anchor = 10.0 * std::log10(6.0 / (std::pow(10.0, snr / 10.0) * 256.0));
    const SummaryRow& row = row_for(res, snr, EstimatorKind::OracleLs);
    const double got = row.pooled_nmse_ch_db;
    out.pass = out.pass && std::abs(got - anchor) <= 1.0;
    out.detail += " " + num(snr, 0) + "dB: " + num(got) + " vs " + num(anchor) + " (per-trial dB mean " +
                  num(row.mean_nmse_ch_db) + ")";
  }
  out.pass = out.pass && secs < 120.0;
  out.detail += "; sweep " + num(secs, 1) + " s";
  return out;
}

Outcome criterion_ls() {
  double secs = 0.0;
  const SweepResult& res = anchor_sweep(&secs);
  Outcome out{true, ""};
  for (double snr : {0.0, 10.0, 20.0, 30.0}) {
    const SummaryRow& row = row_for(res, snr, EstimatorKind::Ls);
    const double got = row.pooled_nmse_ch_db;
    out.pass = out.pass && std::abs(got + snr) <= 0.5;
    out.detail += num(snr, 0) + "dB: " + num(got) + " vs " + num(-snr) + " (per-trial dB mean " +
                  num(row.mean_nmse_ch_db) + "); ";
  }
  out.pass = out.pass && secs < 60.0;
  out.detail += "sweep " + num(secs, 1) + " s";
  return out;
}

Outcome criterion_sgvb_ula() {
  const ExperimentConfig cfg = preset("ula-table2",
                                      "sweep.values = 20\n"
                                      "estimators.enabled = oracle_ls, sgvb\n"
                                      "trials = 100\n");
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult res = run_sweep(cfg);
  const double secs = seconds_since(t0);
  const double sg = row_for(res, 20.0, EstimatorKind::Sgvb).median_nmse_ch_db;
  const double ol = row_for(res, 20.0, EstimatorKind::OracleLs).median_nmse_ch_db;
  return {sg - ol <= 3.0 && secs < 1200.0 && res.failures == 0,
          "median SG-VB " + num(sg) + " dB, Oracle LS " + num(ol) + " dB, gap " + num(sg - ol) + " dB; " +
              num(secs, 1) + " s"};
}

Outcome criterion_sgvb_upa() {
  const ExperimentConfig cfg = preset("upa-table3",
                                      "sweep.values = 20\n"
                                      "estimators.enabled = ls, sgvb\n"
                                      "trials = 100\n");
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult res = run_sweep(cfg);
  const double secs = seconds_since(t0);
  const double sg = row_for(res, 20.0, EstimatorKind::Sgvb).median_nmse_ch_db;
  const double ls = row_for(res, 20.0, EstimatorKind::Ls).median_nmse_ch_db;
  return {ls - sg >= 10.0 && secs < 1200.0 && res.failures == 0,
          "median SG-VB " + num(sg) + " dB, LS " + num(ls) + " dB, gain " + num(ls - sg) + " dB; " +
              num(secs, 1) + " s"};
}

Outcome criterion_grid_size() {
  const ExperimentConfig cfg = preset("ula-table2",
                                      "sweep.variable = grid_size\n"
                                      "sweep.values = 1, 2, 3, 4\n"
                                      "sweep.snr_db = 20\n"
                                      "estimators.enabled = psomp\n"
                                      "trials = 50\n");
  const SweepResult res = run_sweep(cfg);
  double v[4];
  for (int g = 1; g <= 4; ++g) v[g - 1] = row_for(res, g, EstimatorKind::Psomp).mean_nmse_ch_db;
  const bool monotone = v[1] < v[0] && v[2] < v[1];
  const double total = v[0] - v[2];
  const double last = v[2] - v[3];
  return {monotone && total >= 2.0 && last < 1.0,
          "mean P-SOMP NMSE 1N..4N: " + num(v[0]) + ", " + num(v[1]) + ", " + num(v[2]) + ", " + num(v[3]) +
              " dB; 1N->3N gain " + num(total) + " dB, 3N->4N gain " + num(last) + " dB"};
}

Outcome criterion_angles() {
  const ExperimentConfig cfg = preset("ula-table2",
                                      "sweep.values = 30\n"
                                      "estimators.enabled = sgvb, psomp\n"
                                      "trials = 100\n");
  const SweepResult res = run_sweep(cfg);
  const double sg = row_for(res, 30.0, EstimatorKind::Sgvb).median_mse_angle_db;
  const double ps = row_for(res, 30.0, EstimatorKind::Psomp).median_mse_angle_db;
  return {ps - sg >= 10.0, "median angle MSE SG-VB " + num(sg) + " dB, P-SOMP " + num(ps) + " dB, gap " +
                               num(ps - sg) + " dB"};
}

Outcome criterion_exact_recovery() {
  const ArrayGeometry geom = ArrayGeometry::ula(32, 100e9);
  SgvbConfig cfg = SgvbConfig::defaults_for(geom, 3.0, 90.0, 1);
  const SgvbEstimator est(geom, cfg);
  const FactorModel model = factor_model(geom);
  std::mt19937_64 gen(20240607);
  std::uniform_real_distribution<double> theta(-deg2rad(60.0), deg2rad(60.0));
  std::uniform_real_distribution<double> dist(3.0, 90.0);
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0;
  double worst_nmse = -1e9, worst_w = 0.0, worst_s = 0.0, worst_oracle = 0.0;
  for (int t = 0; t < 50; ++t) {
    Scatterer sc{dist(gen), theta(gen), 0.0, std::polar(1.0 + 0.5 * (t % 3), 0.37 * t)};
    const PathParams truth = to_path_params(geom, sc);
    const CVec y = truth.gain * steering_reparam(geom, truth);
    const SgvbResult res = est.run(y);

    // Dense-grid maximum likelihood over (omega, s).
    const auto& ga = model.factors[0].exponents;
    const auto& gc = model.curvature().exponents;
    const int sa = model.factors[0].sign, sc_sign = model.curvature().sign;
    const auto like = [&](double w, double s) {
      cplx acc{};
      for (int i = 0; i < 32; ++i) acc += std::polar(1.0, -(sa * ga[i] * w + sc_sign * gc[i] * s)) * y[i];
      return std::norm(acc);
    };
    const oracle::Argmax2 ml =
        oracle::zoom_argmax_2d(like, -oracle::kPi, oracle::kPi, 0.0, cfg.s_max, 256, 32, 10);

    const double nmse = nmse_channel(y, res.h_hat);
    const double dw = std::abs(oracle::wrap(res.paths[0].params.omega - truth.omega));
    const double ds = std::abs(res.paths[0].params.s - truth.s);
    const double d_oracle = std::max(std::abs(oracle::wrap(ml.x - res.paths[0].params.omega)) / 1e-4,
                                     std::abs(ml.y - res.paths[0].params.s) / 1e-6);
    worst_nmse = std::max(worst_nmse, nmse);
    worst_w = std::max(worst_w, dw);
    worst_s = std::max(worst_s, ds);
    worst_oracle = std::max(worst_oracle, d_oracle);
    if (nmse < -60.0 && dw < 1e-4 && ds < 1e-6 && d_oracle < 1.0) ++ok;
  }
  const double secs = seconds_since(t0);
  return {ok == 50 && secs < 60.0,
          std::to_string(ok) + "/50 recovered; worst NMSE " + num(worst_nmse) + " dB, |dw| " + sci(worst_w) +
              ", |ds| " + sci(worst_s) + ", distance to ML oracle " + num(worst_oracle, 3) + " tol units; " +
              num(secs, 1) + " s"};
}

Outcome criterion_derivatives() {
  std::mt19937_64 gen(77);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-oracle::kPi, oracle::kPi);
  int checked = 0, failed = 0;
  double worst = 0.0;
  auto compare = [&](double analytic, double fd, double floor) {
    const double err = std::abs(analytic - fd) / std::max(std::abs(fd), floor);
    worst = std::max(worst, err);
    ++checked;
    if (!(err <= 1e-5)) ++failed;
  };
  for (const ArrayGeometry& geom : {ArrayGeometry::ula(64, 100e9), ArrayGeometry::upa(8, 8, 3e9)}) {
    const FactorModel model = factor_model(geom);
    const SgvbConfig cfg = SgvbConfig::defaults_for(geom, 3.0, 90.0, 1);
    for (int t = 0; t < 100; ++t) {
      CVec zeta(geom.n_total);
      for (auto& z : zeta) z = {nd(gen), nd(gen)};
      const double mass = zeta.cwiseAbs().sum();

      // Curvature objective used by the distance search.
      const SteeringFactor& curv = model.curvature();
      int gmax = 1;
      for (int g : curv.exponents) gmax = std::max(gmax, std::abs(g));
      const double s = cfg.s_max * std::abs(nd(gen));
      const auto ls = [&](double x) { return curvature_objective(zeta, curv, x).value; };
      const PhaseDerivs d = curvature_objective(zeta, curv, s);
      compare(d.d1, oracle::diff1(ls, s, 1e-4 / gmax), 1e-3 * mass * gmax);
      compare(d.d2, oracle::diff2(ls, s, 1e-3 / gmax), 1e-3 * mass * gmax * gmax);

      // Frequency log-density used by the von Mises fit.
      for (std::size_t f = 0; f < model.frequency_count(); ++f) {
        const auto& g = model.factors[f].exponents;
        const PhasePolynomial poly({zeta.data(), static_cast<std::size_t>(zeta.size())}, g, 1);
        const int gm = std::max(1, poly.max_abs_exponent());
        const double w = ud(gen);
        const auto fw = [&](double x) { return poly.value(x); };
        const PhaseDerivs e = poly.derivs(w);
        compare(e.d1, oracle::diff1(fw, w, 1e-4 / gm), 1e-3 * mass * gm);
        compare(e.d2, oracle::diff2(fw, w, 1e-3 / gm), 1e-3 * mass * gm * gm);
      }
    }
  }
  return {failed == 0, std::to_string(checked - failed) + "/" + std::to_string(checked) +
                           " derivative checks within 1e-5; worst relative error " + sci(worst)};
}

Outcome criterion_moments() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> mu_dist(-oracle::kPi, oracle::kPi);
  std::uniform_real_distribution<double> log_kappa(-3.0, 4.0);
  std::uniform_int_distribution<int> order(0, 64);
  int ok = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double mu = mu_dist(gen);
    const double kappa = std::pow(10.0, log_kappa(gen));
    const int n = order(gen);
    const cplx ref = oracle::von_mises_moment_local(mu, kappa, n);
    const cplx got = von_mises_moment(VonMisesParams::make(mu, kappa), n);
    // Relative to the moment, floored at the quadrature's own round-off level.
    const double err = std::abs(got - ref) / std::max(std::abs(ref), 1e-7);
    worst = std::max(worst, err);
    if (err <= 1e-7) ++ok;
  }
  bool stable = true;
  for (double kappa : {50.0, 1e3, 1e5, 1e7, 1e9}) {
    const std::vector<double> r = bessel_ratios(255, kappa);
    for (int n = 1; n <= 255; ++n) {
      stable = stable && std::isfinite(r[n]) && r[n] > 0.0 && r[n] < 1.0 && r[n] < r[n - 1];
    }
    stable = stable && bessel_ratio(255, kappa) == r[255];
  }
  return {ok == 100 && stable, std::to_string(ok) + "/100 moments within 1e-7 (worst " + sci(worst) +
                                   "); Bessel ratios " + (stable ? "stable" : "UNSTABLE") + " to kappa 1e9, n 255"};
}

Outcome criterion_audit() {
  std::mt19937_64 gen(31);
  double worst = 0.0;
  int sweeps = 0;
  for (int t = 0; t < 100; ++t) {
    const bool upa = t % 2 == 1;
    const ArrayGeometry geom = upa ? ArrayGeometry::upa(8, 6, 3e9) : ArrayGeometry::ula(64, 100e9);
    SceneConfig sc;
    sc.l_paths = 1 + t % 4;
    sc.r_min = upa ? 2.0 : 3.0;
    sc.r_max = upa ? 25.0 : 90.0;
    const Scene scene = generate_scene(geom, sc, 500 + t);
    const double snr = std::pow(10.0, (t % 7) * 5.0 / 10.0);
    const CVec y = add_noise(synthesize_channel(geom, scene, ChannelMode::Fresnel), snr, sc.l_paths, 500 + t).y;
    SgvbConfig cfg = SgvbConfig::defaults_for(geom, sc.r_min, sc.r_max, sc.l_paths);
    const SgvbEstimator est(geom, cfg);
    EstimatorState st = est.initialize(y);
    // Perturb the start so updates move the state substantially.
    for (PathVariational& p : st.paths) {
      p.freq[0].mu = wrap_angle(p.freq[0].mu + 0.05 * std::normal_distribution<double>()(gen));
      p.nu_hat *= 0.8;
      est.refresh_caches(p);
    }
    est.refresh_residual(st);
    for (int l = 0; l < static_cast<int>(st.paths.size()); ++l) {
      est.update_frequency(st, l, FrequencyFactor::Omega);
      worst = std::max(worst, est.residual_mismatch(st));
      if (upa) {
        est.update_frequency(st, l, FrequencyFactor::Psi);
        worst = std::max(worst, est.residual_mismatch(st));
      }
      est.update_s(st, l);
      worst = std::max(worst, est.residual_mismatch(st));
      est.update_gain(st, l);
      worst = std::max(worst, est.residual_mismatch(st));
    }
    for (int l = 0; l < static_cast<int>(st.paths.size()); ++l) est.update_beta(st, l);
    const double before_refresh = est.residual_mismatch(st);
    worst = std::max(worst, before_refresh);
    est.refresh_residual(st);
    est.update_gamma(st);
    ++sweeps;
  }
  return {worst <= 1e-9, std::to_string(sweeps) + " sweeps, worst incremental/rebuilt mismatch " + sci(worst) +
                             " of ||y||"};
}

Outcome criterion_complexity() {
  const std::vector<int> sizes{64, 128, 256, 512};
  std::vector<double> times;
  for (int n : sizes) {
    const ArrayGeometry geom = ArrayGeometry::ula(n, 100e9);
    SceneConfig sc;
    sc.l_paths = 6;
    sc.r_min = 3.0;
    sc.r_max = 90.0;
    const Scene scene = generate_scene(geom, sc, 4242);
    const CVec y = add_noise(synthesize_channel(geom, scene, ChannelMode::Exact), 100.0, 6, 4242).y;
    SgvbConfig cfg = SgvbConfig::defaults_for(geom, 3.0, 90.0, 6);
    const SgvbEstimator est(geom, cfg);
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      EstimatorState st = est.initialize(y);
      const int iters = 10;
      const auto t0 = std::chrono::steady_clock::now();
      for (int it = 0; it < iters; ++it) est.sweep(st);
      best = std::min(best, seconds_since(t0) / iters);
    }
    times.push_back(best);
  }
  // Least squares for t = a N^2 + b N.
  Eigen::MatrixXd a(4, 2);
  Eigen::VectorXd t(4);
  for (int i = 0; i < 4; ++i) {
    a(i, 0) = static_cast<double>(sizes[i]) * sizes[i];
    a(i, 1) = sizes[i];
    t(i) = times[i];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(t);
  const double ss_res = (a * coef - t).squaredNorm();
  const double ss_tot = (t.array() - t.mean()).square().sum();
  const double r2 = 1.0 - ss_res / ss_tot;
  std::string detail = "per-iteration ms:";
  for (int i = 0; i < 4; ++i) detail += " N=" + std::to_string(sizes[i]) + ":" + num(times[i] * 1e3, 3);
  detail += "; R^2 " + num(r2, 4);
  return {r2 >= 0.98, detail};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome criterion_determinism() {
  std::vector<std::string> outputs;
  const std::vector<std::pair<int, const char*>> runs{{1, nullptr}, {3, nullptr}, {1, "2"}};
  int idx = 0;
  for (const auto& [workers, env] : runs) {
    ExperimentConfig cfg = preset("ula-table2",
                                  "sweep.values = 10, 25\n"
                                  "estimators.enabled = ls, oracle_ls, sgvb, psomp\n"
                                  "trials = 4\n");
    cfg.workers = workers;
    cfg.output_dir = (g_work / ("determinism_" + std::to_string(idx++))).string();
    if (env) {
      setenv("NF_SGVB_WORKERS", env, 1);
    } else {
      unsetenv("NF_SGVB_WORKERS");
    }
    write_sweep_outputs(cfg, run_sweep(cfg));
    outputs.push_back(read_file(std::filesystem::path(cfg.output_dir) / "results.csv"));
  }
  unsetenv("NF_SGVB_WORKERS");
  const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
  return {same, std::string("results.csv ") + (same ? "byte-identical" : "DIFFERS") +
                    " across workers 1, 3 and NF_SGVB_WORKERS=2 (" + std::to_string(outputs[0].size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      g_work = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--work-dir DIR] [--only N[,N...]]\n");
      return 2;
    }
  }
  std::filesystem::create_directories(g_work);

  const std::vector<Criterion> criteria{
      {1, "Oracle-LS analytic anchor", criterion_oracle_ls},
      {2, "LS anchor", criterion_ls},
      {3, "SG-VB vs Oracle LS (ULA)", criterion_sgvb_ula},
      {4, "SG-VB vs LS gain (UPA)", criterion_sgvb_upa},
      {5, "P-SOMP grid-size trend", criterion_grid_size},
      {6, "angle-recovery gap at 30 dB", criterion_angles},
      {7, "noiseless exact recovery", criterion_exact_recovery},
      {8, "derivative suite", criterion_derivatives},
      {9, "circular moments and Bessel ratios", criterion_moments},
      {10, "residual bookkeeping audit", criterion_audit},
      {11, "per-iteration complexity scaling", criterion_complexity},
      {12, "determinism across worker counts", criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), out.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
