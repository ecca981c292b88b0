// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nfsgvb/error.hpp"
#include "nfsgvb/evaluation.hpp"
#include "nfsgvb/rng.hpp"

#ifndef NFSGVB_VERSION
#define NFSGVB_VERSION "unknown"
#endif

namespace nfsgvb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::pair<double, double> distance_span(const ExperimentConfig& config) {
  double lo = config.scene.r_min;
  if (config.variable == SweepVariable::Distance) {
    for (double v : config.values) lo = std::min(lo, v);
  }
  return {lo, config.distance_ceiling()};
}

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, text.data(), text.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

struct PathSet {
  std::vector<FrequencyPoint> freq;
  std::vector<double> theta;
  std::vector<double> r;

  void add(const ArrayGeometry& geom, const PathParams& params) {
    const PolarLocation loc = from_path_params_clamped(geom, params);
    freq.push_back({params.omega, params.psi});
    theta.push_back(loc.theta);
    r.push_back(loc.r);
  }
};

PathSet truth_paths(const ArrayGeometry& geom, const Scene& scene) {
  PathSet out;
  for (const Scatterer& sc : scene.scatterers) {
    const PathParams p = to_path_params(geom, sc);
    out.freq.push_back({p.omega, p.psi});
    out.theta.push_back(sc.theta);
    out.r.push_back(sc.r);
  }
  return out;
}

PathSet atom_paths(const ArrayGeometry& geom, const PolarCodebook& cb, const std::vector<Eigen::Index>& atoms) {
  PathSet out;
  for (Eigen::Index a : atoms) {
    const PolarAtom& atom = cb.lookup.at(static_cast<std::size_t>(a));
    PathParams p;
    p.omega = atom.omega;
    p.psi = atom.psi;
    p.s = atom.s;
    out.add(geom, p);
  }
  return out;
}

void fill_path_metrics(TrialRecord& rec, const ArrayGeometry& geom, const PathSet& truth, const PathSet& est,
                       const ExperimentConfig& config) {
  if (est.freq.empty()) {
    rec.mse_angle_db = kNaN;
    rec.nmse_r_db = kNaN;
    return;
  }
  const MatchedPairs pairs = match_paths(truth.freq, est.freq, geom.is_upa());
  try {
    rec.mse_angle_db = mse_angles(pairs, truth.theta, est.theta, config.metrics);
    rec.nmse_r_db = nmse_distance(pairs, truth.r, est.r, config.distance_ceiling());
  } catch (const NoMatches&) {
    rec.mse_angle_db = kNaN;
    rec.nmse_r_db = kNaN;
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, double sweep_value, int trial) {
  return derive_seed(master_seed, "trial", std::bit_cast<std::uint64_t>(sweep_value),
                     static_cast<std::uint64_t>(trial));
}

TrialInput make_trial(const ExperimentConfig& config, const ArrayGeometry& geom, double sweep_value, int trial) {
  const std::uint64_t seed = trial_seed(config.master_seed, sweep_value, trial);
  SceneConfig sc = config.scene;
  if (config.variable == SweepVariable::Distance) sc.fixed_distance = sweep_value;
  TrialInput in;
  in.scene = generate_scene(geom, sc, seed);
  in.h = synthesize_channel(geom, in.scene, config.channel_mode);
  in.snr_db = config.variable == SweepVariable::Snr ? sweep_value : config.snr_db;
  const NoisyObservation obs = add_noise(in.h, std::pow(10.0, in.snr_db / 10.0), sc.l_paths, seed);
  in.y = obs.y;
  in.n0 = obs.n0;
  const double multiple = config.variable == SweepVariable::GridSize ? sweep_value : config.grid_size;
  in.angular_size = static_cast<int>(std::lround(multiple * geom.n_total));
  return in;
}

std::vector<int> codebook_sizes(const ExperimentConfig& config) {
  std::vector<int> out;
  if (!config.has(EstimatorKind::Psomp) && !config.has(EstimatorKind::Sbl)) return out;
  const int n = config.geometry().n_total;
  if (config.variable == SweepVariable::GridSize) {
    for (double v : config.values) out.push_back(static_cast<int>(std::lround(v * n)));
  } else {
    out.push_back(static_cast<int>(std::lround(config.grid_size * n)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string codebook_key(const ExperimentConfig& config, int angular_size) {
  const ArrayGeometry geom = config.geometry();
  const auto [r_lo, r_hi] = distance_span(config);
  std::ostringstream os;
  os << "nfsgvb-codebook-v1"
     << "|kind=" << (geom.is_upa() ? "upa" : "ula") << "|n_h=" << (geom.is_upa() ? geom.n_h : geom.n_total)
     << "|n_v=" << (geom.is_upa() ? geom.n_v : 1) << "|carrier=" << fmt(config.carrier_hz)
     << "|spacing=" << fmt(config.spacing_wavelengths) << "|r_min=" << fmt(r_lo) << "|r_max=" << fmt(r_hi)
     << "|angular=" << angular_size << "|coherence=" << fmt(config.coherence);
  return sha256_hex(os.str());
}

CodebookStore::CodebookStore(const ExperimentConfig& config, const std::filesystem::path& cache_dir) {
  const ArrayGeometry geom = config.geometry();
  const auto [r_lo, r_hi] = distance_span(config);
  for (int size : codebook_sizes(config)) {
    const std::string key = codebook_key(config, size);
    const std::filesystem::path file = cache_dir.empty() ? std::filesystem::path{} : cache_dir / (key + ".cbk");
    if (!cache_dir.empty()) {
      if (auto cached = load_codebook(file, key)) {
        books_.emplace(size, std::move(*cached));
        ++loaded_;
        continue;
      }
    }
    PolarCodebook cb = build_polar_codebook(geom, r_lo, r_hi, size, config.coherence);
    if (!cache_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(cache_dir, ec);
      try {
        save_codebook(file, cb, key);
      } catch (const std::exception&) {
        // The cache is an optimization; an unwritable directory is not an error.
      }
    }
    books_.emplace(size, std::move(cb));
  }
}

const PolarCodebook& CodebookStore::get(int angular_size) const {
  const auto it = books_.find(angular_size);
  if (it == books_.end()) throw std::out_of_range("codebook of size " + std::to_string(angular_size) + " not prepared");
  return it->second;
}

namespace {

void set_channel_error(TrialRecord& rec, const CVec& h, const CVec& h_hat) {
  rec.nmse_ch_db = nmse_channel(h, h_hat);
  rec.error_energy = (h - h_hat).squaredNorm();
  rec.channel_energy = h.squaredNorm();
}

}  // namespace

std::vector<TrialRecord> run_trial(const ExperimentConfig& config, const ArrayGeometry& geom,
                                   const SgvbEstimator& sgvb, const CodebookStore& codebooks, double sweep_value,
                                   int trial) {
  std::vector<TrialRecord> out;
  TrialInput in;
  std::string setup_error;
  try {
    in = make_trial(config, geom, sweep_value, trial);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  const PathSet truth = setup_error.empty() ? truth_paths(geom, in.scene) : PathSet{};

  for (EstimatorKind kind : config.estimators) {
    TrialRecord rec;
    rec.sweep_value = sweep_value;
    rec.trial = trial;
    rec.estimator = kind;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (!setup_error.empty()) throw std::runtime_error(setup_error);
      switch (kind) {
        case EstimatorKind::Ls: {
          set_channel_error(rec, in.h, ls_estimate(in.y));
          rec.mse_angle_db = kNaN;
          rec.nmse_r_db = kNaN;
          rec.converged = true;
          break;
        }
        case EstimatorKind::OracleLs: {
          const OracleLsResult res = oracle_ls_estimate(in.y, geom, in.scene, config.channel_mode);
          set_channel_error(rec, in.h, res.h_hat);
          rec.mse_angle_db = kNaN;
          rec.nmse_r_db = kNaN;
          rec.converged = true;
          break;
        }
        case EstimatorKind::Sgvb: {
          const SgvbResult res = sgvb.run(in.y);
          set_channel_error(rec, in.h, res.h_hat);
          PathSet est;
          for (const PathEstimate& p : res.paths) {
            if (p.active) est.add(geom, p.params);
          }
          fill_path_metrics(rec, geom, truth, est, config);
          rec.iters = res.iterations;
          rec.converged = res.converged;
          break;
        }
        case EstimatorKind::Psomp: {
          const PolarCodebook& cb = codebooks.get(in.angular_size);
          const PursuitResult res = p_somp(in.y, cb, config.scene.l_paths);
          set_channel_error(rec, in.h, res.h_hat);
          fill_path_metrics(rec, geom, truth, atom_paths(geom, cb, res.atoms), config);
          rec.iters = static_cast<int>(res.atoms.size());
          rec.converged = true;
          break;
        }
        case EstimatorKind::Sbl: {
          const PolarCodebook& cb = codebooks.get(in.angular_size);
          const SblResult res = sbl_estimate(in.y, cb, config.sbl);
          set_channel_error(rec, in.h, res.h_hat);
          std::vector<Eigen::Index> atoms;
          for (Eigen::Index a : res.top_atoms(config.scene.l_paths)) {
            if (res.weights(a) > 0.0) atoms.push_back(a);
          }
          fill_path_metrics(rec, geom, truth, atom_paths(geom, cb, atoms), config);
          rec.iters = res.iterations;
          rec.converged = res.converged;
          break;
        }
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
      rec.nmse_ch_db = kNaN;
      rec.mse_angle_db = kNaN;
      rec.nmse_r_db = kNaN;
      rec.converged = false;
    }
    if (config.record_wall_time) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("NF_SGVB_WORKERS")) {
    int v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size() && v >= 0) requested = v;
  }
  if (requested <= 0) requested = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return requested;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  const ArrayGeometry geom = config.geometry();
  const SgvbEstimator sgvb(geom, config.sgvb_config());
  std::filesystem::path cache_dir;
  if (config.codebook_cache) {
    cache_dir = config.codebook_cache_dir.empty() ? std::filesystem::path(config.output_dir) / "cache"
                                                  : std::filesystem::path(config.codebook_cache_dir);
  }
  const CodebookStore codebooks(config, cache_dir);

  const std::size_t trials = static_cast<std::size_t>(config.trials);
  const std::size_t tasks = config.values.size() * trials;
  std::vector<std::vector<TrialRecord>> slots(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
      slots[t] = run_trial(config, geom, sgvb, codebooks, config.values[t / trials], static_cast<int>(t % trials));
    }
  };
  const int workers = std::min<int>(resolve_workers(config.workers), static_cast<int>(std::max<std::size_t>(tasks, 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  SweepResult out;
  for (auto& slot : slots) {
    for (TrialRecord& rec : slot) {
      if (rec.failed) ++out.failures;
      out.records.push_back(std::move(rec));
    }
  }
  out.summary = summarize(out.records);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  struct Acc {
    SummaryRow row;
    std::vector<double> ch, angle, r, iters;
    double err = 0.0, energy = 0.0;
    int converged = 0;
  };
  std::vector<Acc> accs;
  for (const TrialRecord& rec : records) {
    auto it = std::find_if(accs.begin(), accs.end(), [&](const Acc& a) {
      return a.row.sweep_value == rec.sweep_value && a.row.estimator == rec.estimator;
    });
    if (it == accs.end()) {
      accs.push_back({});
      it = accs.end() - 1;
      it->row.sweep_value = rec.sweep_value;
      it->row.estimator = rec.estimator;
    }
    ++it->row.trials;
    if (rec.failed) {
      ++it->row.failures;
      continue;
    }
    if (!std::isnan(rec.nmse_ch_db)) it->ch.push_back(rec.nmse_ch_db);
    it->err += rec.error_energy;
    it->energy += rec.channel_energy;
    if (!std::isnan(rec.mse_angle_db)) it->angle.push_back(rec.mse_angle_db);
    if (!std::isnan(rec.nmse_r_db)) it->r.push_back(rec.nmse_r_db);
    it->iters.push_back(rec.iters);
    if (rec.converged) ++it->converged;
  }
  std::vector<SummaryRow> out;
  for (Acc& a : accs) {
    a.row.median_nmse_ch_db = median(a.ch);
    a.row.mean_nmse_ch_db = mean(a.ch);
    a.row.pooled_nmse_ch_db = a.energy > 0.0 ? to_db(a.err / a.energy) : kNaN;
    a.row.median_mse_angle_db = median(a.angle);
    a.row.mean_mse_angle_db = mean(a.angle);
    a.row.median_nmse_r_db = median(a.r);
    a.row.mean_nmse_r_db = mean(a.r);
    a.row.mean_iters = mean(a.iters);
    const int ok = a.row.trials - a.row.failures;
    a.row.converged_fraction = ok > 0 ? static_cast<double>(a.converged) / ok : kNaN;
    out.push_back(a.row);
  }
  return out;
}

std::string results_csv(const std::vector<TrialRecord>& records) {
  std::string out = "sweep_value,trial,estimator,nmse_ch_db,mse_angle_db,nmse_r_db,iters,wall_ms,converged\n";
  for (const TrialRecord& r : records) {
    out += fmt(r.sweep_value) + ',' + std::to_string(r.trial) + ',' + std::string(to_string(r.estimator)) + ',' +
           fmt(r.nmse_ch_db) + ',' + fmt(r.mse_angle_db) + ',' + fmt(r.nmse_r_db) + ',' + std::to_string(r.iters) +
           ',' + fmt_fixed(r.wall_ms, 3) + ',' + (r.failed ? "failed" : (r.converged ? "true" : "false")) + '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "sweep_value,estimator,trials,failures,median_nmse_ch_db,mean_nmse_ch_db,pooled_nmse_ch_db,"
      "median_mse_angle_db,mean_mse_angle_db,median_nmse_r_db,mean_nmse_r_db,mean_iters,converged_fraction\n";
  for (const SummaryRow& r : rows) {
    out += fmt(r.sweep_value) + ',' + std::string(to_string(r.estimator)) + ',' + std::to_string(r.trials) + ',' +
           std::to_string(r.failures) + ',' + fmt(r.median_nmse_ch_db) + ',' + fmt(r.mean_nmse_ch_db) + ',' +
           fmt(r.pooled_nmse_ch_db) + ',' +
           fmt(r.median_mse_angle_db) + ',' + fmt(r.mean_mse_angle_db) + ',' + fmt(r.median_nmse_r_db) + ',' +
           fmt(r.mean_nmse_r_db) + ',' + fmt(r.mean_iters) + ',' + fmt(r.converged_fraction) + '\n';
  }
  return out;
}

std::string manifest_text(const ExperimentConfig& config) {
  std::string out = "# nfsgvb run manifest\n";
  out += "code_version = " NFSGVB_VERSION "\n";
  for (const auto& [k, v] : config.echo()) out += k + " = " + v + '\n';
  for (int size : codebook_sizes(config)) {
    out += "codebook." + std::to_string(size) + ".key = " + codebook_key(config, size) + '\n';
  }
  return out;
}

void write_sweep_outputs(const ExperimentConfig& config, const SweepResult& result) {
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "results.csv", results_csv(result.records));
  write_file(dir / "summary.csv", summary_csv(result.summary));
  std::string manifest = manifest_text(config);
  for (const TrialRecord& r : result.records) {
    if (r.failed) {
      manifest += "failure = " + fmt(r.sweep_value) + ',' + std::to_string(r.trial) + ',' +
                  std::string(to_string(r.estimator)) + ": " + r.error + '\n';
    }
  }
  write_file(dir / "manifest.txt", manifest);
}

SingleReport run_single(const ExperimentConfig& config, bool dump_state) {
  config.validate();
  const ArrayGeometry geom = config.geometry();
  const double value = config.values.front();
  SingleReport report;
  report.input = make_trial(config, geom, value, 0);

  SgvbConfig traced = config.sgvb_config();
  traced.record_trajectory = dump_state;
  traced.stop_on_convergence = !dump_state;
  report.sgvb = SgvbEstimator(geom, traced).run(report.input.y);

  ExperimentConfig others = config;
  others.estimators.erase(std::remove(others.estimators.begin(), others.estimators.end(), EstimatorKind::Sgvb),
                          others.estimators.end());
  std::filesystem::path cache_dir;
  if (config.codebook_cache) {
    cache_dir = config.codebook_cache_dir.empty() ? std::filesystem::path(config.output_dir) / "cache"
                                                  : std::filesystem::path(config.codebook_cache_dir);
  }
  const CodebookStore codebooks(others, cache_dir);
  const SgvbEstimator plain(geom, config.sgvb_config());
  if (!others.estimators.empty()) report.records = run_trial(others, geom, plain, codebooks, value, 0);

  if (config.has(EstimatorKind::Sgvb)) {
    TrialRecord rec;
    rec.sweep_value = value;
    rec.estimator = EstimatorKind::Sgvb;
    set_channel_error(rec, report.input.h, report.sgvb.h_hat);
    PathSet est;
    for (const PathEstimate& p : report.sgvb.paths) {
      if (p.active) est.add(geom, p.params);
    }
    fill_path_metrics(rec, geom, truth_paths(geom, report.input.scene), est, config);
    rec.iters = report.sgvb.iterations;
    rec.converged = report.sgvb.converged;
    report.records.push_back(std::move(rec));
  }
  return report;
}

std::string trace_csv(const SingleReport& report, bool upa) {
  const std::size_t paths = report.sgvb.state.paths.size();
  std::string out = "iter,residual_norm,gamma_hat";
  for (std::size_t l = 1; l <= paths; ++l) {
    const std::string i = std::to_string(l);
    out += ",omega_" + i;
    if (upa) out += ",psi_" + i;
    out += ",s_" + i + ",gain_power_" + i;
  }
  out += '\n';
  for (const IterationRecord& rec : report.sgvb.state.trajectory) {
    if (rec.iter < 1) continue;
    out += std::to_string(rec.iter) + ',' + fmt(rec.residual_norm) + ',' + fmt(rec.gamma_hat);
    for (std::size_t l = 0; l < paths; ++l) {
      out += ',' + fmt(rec.omega[l]);
      if (upa) out += ',' + fmt(rec.psi[l]);
      out += ',' + fmt(rec.s[l]) + ',' + fmt(rec.gain_power[l]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace nfsgvb
