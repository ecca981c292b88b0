// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nfsgvb/types.hpp"

namespace nfsgvb {

inline constexpr double kDbFloor = -300.0;

// 10 log10(x), floored at kDbFloor for x <= 1e-30.
double to_db(double ratio);

// Throws ZeroReference when ||h_true|| = 0.
double nmse_channel(const CVec& h_true, const CVec& h_hat);

// Spatial frequencies used for matching; psi is ignored for a ULA.
struct FrequencyPoint {
  double omega = 0.0;
  double psi = 0.0;
};

struct MatchedPairs {
  std::vector<std::pair<int, int>> pairs;  // (true index, estimate index), sorted by true index
  std::vector<int> unmatched_true;
  std::vector<int> unmatched_est;
  double cost = 0.0;
};

// Wrapped Euclidean distance in (omega[, psi]).
double frequency_distance(const FrequencyPoint& a, const FrequencyPoint& b, bool use_psi);

// Minimum-cost assignment (Hungarian) between the two sets.
MatchedPairs match_paths(std::span<const FrequencyPoint> truth, std::span<const FrequencyPoint> est,
                         bool use_psi);

// Minimum-cost rectangular assignment; row i is paired with column result[i].
// Requires rows <= cols.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

struct MetricOptions {
  bool angles_in_degrees = false;
  bool normalize_by_paths = false;
};

// 10 log10 of the summed squared angle error. Unmatched true paths are charged pi/2.
// Throws NoMatches.
double mse_angles(const MatchedPairs& pairs, std::span<const double> true_theta,
                  std::span<const double> est_theta, const MetricOptions& options = {});

// 10 log10(||r - r_hat||^2 / ||r||^2). Unmatched true paths, and far-field
// estimates (r_hat = inf) paired with finite truths, are charged r_max.
double nmse_distance(const MatchedPairs& pairs, std::span<const double> true_r,
                     std::span<const double> est_r, double r_max);

}  // namespace nfsgvb
