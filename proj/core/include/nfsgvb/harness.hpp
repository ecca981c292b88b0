// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nfsgvb/baselines.hpp"
#include "nfsgvb/channel_model.hpp"
#include "nfsgvb/config.hpp"
#include "nfsgvb/sgvb.hpp"

namespace nfsgvb {

struct TrialRecord {
  double sweep_value = 0.0;
  int trial = 0;
  EstimatorKind estimator = EstimatorKind::Ls;
  double nmse_ch_db = 0.0;
  double error_energy = 0.0;    // ||h - h_hat||^2, not written to results.csv
  double channel_energy = 0.0;  // ||h||^2
  double mse_angle_db = 0.0;  // NaN when the estimator reports no paths
  double nmse_r_db = 0.0;     // NaN when the estimator reports no paths
  int iters = 0;
  double wall_ms = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct SummaryRow {
  double sweep_value = 0.0;
  EstimatorKind estimator = EstimatorKind::Ls;
  int trials = 0;
  int failures = 0;
  double median_nmse_ch_db = 0.0;
  double mean_nmse_ch_db = 0.0;
  // 10 log10 of summed error energy over summed channel energy.
  double pooled_nmse_ch_db = 0.0;
  double median_mse_angle_db = 0.0;
  double mean_mse_angle_db = 0.0;
  double median_nmse_r_db = 0.0;
  double mean_nmse_r_db = 0.0;
  double mean_iters = 0.0;
  double converged_fraction = 0.0;
};

// One Monte-Carlo draw shared by every estimator in a trial.
struct TrialInput {
  Scene scene;
  CVec h;
  CVec y;
  double n0 = 0.0;
  double snr_db = 0.0;
  int angular_size = 0;
};

std::uint64_t trial_seed(std::uint64_t master_seed, double sweep_value, int trial);
TrialInput make_trial(const ExperimentConfig& config, const ArrayGeometry& geom, double sweep_value,
                      int trial);

// Angular codebook sizes (grid multiple times N) needed by a sweep; empty when
// no dictionary-based estimator is enabled.
std::vector<int> codebook_sizes(const ExperimentConfig& config);
// SHA-256 over the codebook-relevant configuration subset.
std::string codebook_key(const ExperimentConfig& config, int angular_size);

// Builds (or loads) every codebook a sweep needs up front; lookups are then read-only.
class CodebookStore {
 public:
  // cache_dir empty disables the on-disk cache.
  CodebookStore(const ExperimentConfig& config, const std::filesystem::path& cache_dir);
  const PolarCodebook& get(int angular_size) const;
  int loaded_from_cache() const { return loaded_; }

 private:
  std::map<int, PolarCodebook> books_;
  int loaded_ = 0;
};

// Runs every enabled estimator on one trial. Estimator exceptions become failed records.
std::vector<TrialRecord> run_trial(const ExperimentConfig& config, const ArrayGeometry& geom,
                                   const SgvbEstimator& sgvb, const CodebookStore& codebooks, double sweep_value,
                                   int trial);

struct SweepResult {
  std::vector<TrialRecord> records;  // (sweep value, trial, estimator) order
  std::vector<SummaryRow> summary;
  int failures = 0;
};

// NF_SGVB_WORKERS overrides the request; 0 means hardware concurrency.
int resolve_workers(int requested);

SweepResult run_sweep(const ExperimentConfig& config);
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

std::string results_csv(const std::vector<TrialRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string manifest_text(const ExperimentConfig& config);
// Writes results.csv, summary.csv and manifest.txt into config.output_dir.
void write_sweep_outputs(const ExperimentConfig& config, const SweepResult& result);

struct SingleReport {
  TrialInput input;
  SgvbResult sgvb;
  std::vector<TrialRecord> records;
};

// One trial at the first sweep value. With dump_state the estimator runs all
// max_iters iterations and records its trajectory.
SingleReport run_single(const ExperimentConfig& config, bool dump_state);
std::string trace_csv(const SingleReport& report, bool upa);

}  // namespace nfsgvb
