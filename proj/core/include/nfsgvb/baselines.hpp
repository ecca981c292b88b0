// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nfsgvb/channel_model.hpp"
#include "nfsgvb/types.hpp"

namespace nfsgvb {

CVec ls_estimate(const CVec& y);

struct OracleLsResult {
  CVec h_hat;
  bool rank_deficient = false;
};

// Projection of y onto the true steering vectors, built in the given synthesis mode.
OracleLsResult oracle_ls_estimate(const CVec& y, const ArrayGeometry& geom, const Scene& true_scene,
                                  ChannelMode mode = ChannelMode::Fresnel);

struct PolarAtom {
  double omega = 0.0;
  double psi = 0.0;
  double s = 0.0;
};

struct PolarCodebook {
  CMat atoms;                       // N x M, unit-norm columns
  std::vector<double> angle_grid;   // omega values
  std::vector<double> psi_grid;     // UPA only
  std::vector<std::vector<double>> s_grid_per_angle;
  std::vector<PolarAtom> lookup;
  double ring_spacing = 0.0;

  Eigen::Index size() const { return atoms.cols(); }
};

// Normalized correlation |f(s)^H f(s + delta)| / N of the curvature factor.
double ring_coherence(const ArrayGeometry& geom, double delta);

// Largest ring spacing delta* with ring_coherence >= coherence on [0, delta*].
double coherence_spacing(const ArrayGeometry& geom, double coherence);

PolarCodebook build_polar_codebook(const ArrayGeometry& geom, double r_min, double r_max,
                                   int angular_size, double coherence_param = 0.5);

void save_codebook(const std::filesystem::path& file, const PolarCodebook& cb, const std::string& key);
// Empty when the file is missing, unreadable or carries another key.
std::optional<PolarCodebook> load_codebook(const std::filesystem::path& file, const std::string& key);

struct PursuitResult {
  CVec h_hat;
  std::vector<Eigen::Index> atoms;
  CVec coefficients;
  std::vector<double> residual_norms;  // after each selection
};

// Greedy pursuit with least-squares re-fit (single snapshot).
PursuitResult p_somp(const CVec& y, const PolarCodebook& codebook, int l_paths);

struct SblConfig {
  int max_em_iters = 300;
  double prune_tol = 1e-8;  // drop atoms whose variance falls below prune_tol * max variance
  double tol = 1e-6;        // relative change of the posterior mean
  double a_gamma = 0.0;
  double b_gamma = 0.0;
  std::optional<double> fixed_noise_precision;
  bool record_evidence = false;

  void validate() const;
};

struct SblResult {
  CVec h_hat;
  CVec mu;              // length M, zero on pruned atoms
  RVec weights;         // |mu_m|^2
  RVec variances;       // prior variances 1/beta_m, zero when pruned
  double noise_precision = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> evidence;  // log p(y) before each EM step, when recorded

  // Indices of the largest-weight atoms, strongest first.
  std::vector<Eigen::Index> top_atoms(int count) const;
};

SblResult sbl_estimate(const CVec& y, const PolarCodebook& codebook, const SblConfig& config = {});

}  // namespace nfsgvb
