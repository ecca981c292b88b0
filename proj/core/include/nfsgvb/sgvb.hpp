// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "nfsgvb/channel_model.hpp"
#include "nfsgvb/math_kernels.hpp"
#include "nfsgvb/types.hpp"

namespace nfsgvb {

inline constexpr double kGammaMin = 1e-12;
inline constexpr double kGammaMax = 1e12;

struct SgvbConfig {
  int l_paths = 1;
  int max_iters = 150;
  int grid_points_k = 256;
  double newton_step = 0.01;
  double newton_tol = 1e-10;
  int newton_max_steps = 50;
  double conv_tol = 1e-6;
  double a_beta = 1e-6;
  double b_beta = 1e-6;
  double a_gamma = 1e-6;
  double b_gamma = 1e-6;
  double s_min = 0.0;
  double s_max = 0.0;
  // Report-time activity rule: |nu|^2 >= prune_tol * max|nu|^2 and
  // N |nu|^2 gamma >= detect_threshold.
  double prune_tol = 1e-4;
  double detect_threshold = 20.0;
  // Joint (frequency, curvature) search budget used by the greedy start.
  double init_phase_budget = 1.0;
  int init_refine_rounds = 3;
  bool stop_on_convergence = true;
  bool record_trajectory = false;
  // Verify the residual against a from-scratch rebuild after every update.
  bool audit = false;

  // Table defaults for the geometry: 150 iterations (ULA) or 200 (UPA).
  static SgvbConfig defaults_for(const ArrayGeometry& geom, double r_min, double r_max, int l_paths);
  void set_distance_range(const ArrayGeometry& geom, double r_min, double r_max);
  void validate() const;
};

struct CurvatureSearch {
  double s_min = 0.0;
  double s_max = 0.0;
  int grid_points = 256;
  double step = 0.01;
  double tol = 1e-10;
  int max_steps = 50;

  static CurvatureSearch from(const SgvbConfig& cfg);
};

struct CurvatureSearchInfo {
  double coarse = 0.0;
  int newton_steps = 0;
  bool fell_back = false;
};

// L(s) = Re zeta^H factor(s) with analytic first and second derivatives.
PhaseDerivs curvature_objective(const CVec& zeta, const SteeringFactor& factor, double s);

// Grid argmax over K points on [s_min, s_max] plus s = 0, then damped Newton.
// A warm start is used as the Newton seed when it scores higher than the grid.
double grid_search_s(const CVec& zeta, const SteeringFactor& factor, const CurvatureSearch& search,
                     std::optional<double> warm_start = std::nullopt,
                     CurvatureSearchInfo* info = nullptr);

enum class FrequencyFactor { Omega = 0, Psi = 1 };
enum class UpdateStatus { Applied, Skipped };

struct PathVariational {
  std::vector<VonMisesParams> freq;  // omega, then psi for a UPA
  double s_hat = 0.0;
  cplx nu_hat{};
  double tau_nu = 1.0;
  double beta_hat = 1.0;
  std::vector<CVec> cache;  // expected factors in model order, curvature last

  const VonMisesParams& omega() const { return freq.at(0); }
  const VonMisesParams& psi() const { return freq.at(1); }
};

struct IterationRecord {
  int iter = 0;
  double residual_norm = 0.0;
  double gamma_hat = 0.0;
  std::vector<double> omega;
  std::vector<double> psi;
  std::vector<double> s;
  std::vector<double> gain_power;
};

struct EstimatorState {
  CVec y;
  std::vector<PathVariational> paths;
  double gamma_hat = 1.0;
  CVec residual;
  int iter = 0;
  std::vector<double> history;  // residual norm, entry 0 after initialization
  std::vector<IterationRecord> trajectory;
  int skipped_updates = 0;
};

struct PathEstimate {
  PathParams params;  // gain = nu_hat
  PolarLocation location;
  cplx alpha{};
  double tau_nu = 0.0;
  bool active = true;
};

struct SgvbResult {
  EstimatorState state;
  CVec h_hat;
  std::vector<PathEstimate> paths;
  int iterations = 0;
  bool converged = false;
};

class SgvbEstimator {
 public:
  SgvbEstimator(const ArrayGeometry& geom, SgvbConfig config);

  EstimatorState initialize(const CVec& y) const;

  UpdateStatus update_frequency(EstimatorState& state, int path, FrequencyFactor factor) const;
  UpdateStatus update_s(EstimatorState& state, int path) const;
  void update_gain(EstimatorState& state, int path) const;
  void update_beta(EstimatorState& state, int path) const;
  // Expects a freshly rebuilt residual.
  void update_gamma(EstimatorState& state) const;
  void refresh_residual(EstimatorState& state) const;

  // One full pass: per path frequency(ies), s, gain; then beta, residual rebuild, gamma.
  void sweep(EstimatorState& state) const;

  SgvbResult run(const CVec& y) const;
  SgvbResult finish(EstimatorState state, int iterations, bool converged) const;

  CVec residual_from_scratch(const EstimatorState& state) const;
  // ||residual - rebuilt|| / ||y||
  double residual_mismatch(const EstimatorState& state) const;
  // <||y - sum nu x||^2> under the current variational factors.
  double expected_residual_energy(const EstimatorState& state) const;

  CVec path_product(const PathVariational& path) const;
  PathVariational make_path(const PathParams& params, double kappa, double tau_nu,
                            double beta_hat) const;
  void refresh_caches(PathVariational& path) const;
  bool path_active(const EstimatorState& state, int path) const;

  const ArrayGeometry& geometry() const { return geom_; }
  const SgvbConfig& config() const { return cfg_; }
  const FactorModel& model() const { return model_; }

 private:
  struct Peak {
    std::vector<double> freq;
    double s = 0.0;
  };
  Peak coarse_peak(const CVec& residual) const;
  void greedy_refine(const CVec& residual, Peak& peak, cplx& gain) const;
  CVec others_product(const PathVariational& path, std::size_t skip) const;
  void check_audit(const EstimatorState& state, const char* where) const;
  void record(EstimatorState& state) const;

  ArrayGeometry geom_;
  SgvbConfig cfg_;
  FactorModel model_;
  CurvatureSearch search_;
  // Init-time coarse search tables.
  CMat dft_h_;
  CMat dft_v_;
  std::vector<double> init_s_grid_;
};

SgvbResult run_sgvb(const CVec& y, const ArrayGeometry& geom, const SgvbConfig& config);

}  // namespace nfsgvb
