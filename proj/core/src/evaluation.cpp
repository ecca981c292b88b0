// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nfsgvb/error.hpp"

namespace nfsgvb {

double to_db(double ratio) {
  if (std::isnan(ratio)) return ratio;
  if (!(ratio > 1e-30)) return kDbFloor;
  return std::max(10.0 * std::log10(ratio), kDbFloor);
}

double nmse_channel(const CVec& h_true, const CVec& h_hat) {
  if (h_true.size() != h_hat.size()) throw std::invalid_argument("nmse_channel: length mismatch");
  const double ref = h_true.squaredNorm();
  if (!(ref > 0.0)) throw ZeroReference();
  return to_db((h_true - h_hat).squaredNorm() / ref);
}

double frequency_distance(const FrequencyPoint& a, const FrequencyPoint& b, bool use_psi) {
  const double dw = wrap_angle(a.omega - b.omega);
  const double dp = use_psi ? wrap_angle(a.psi - b.psi) : 0.0;
  return std::hypot(dw, dp);
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  // Potentials-based O(n^2 m) assignment, rows <= cols, 1-based internally.
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n > m) throw std::invalid_argument("hungarian: more rows than columns");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) assign[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return assign;
}

MatchedPairs match_paths(std::span<const FrequencyPoint> truth, std::span<const FrequencyPoint> est,
                         bool use_psi) {
  MatchedPairs out;
  const int nt = static_cast<int>(truth.size());
  const int ne = static_cast<int>(est.size());
  if (nt == 0 || ne == 0) {
    for (int i = 0; i < nt; ++i) out.unmatched_true.push_back(i);
    for (int j = 0; j < ne; ++j) out.unmatched_est.push_back(j);
    return out;
  }
  const bool transpose = nt > ne;
  const int rows = transpose ? ne : nt;
  const int cols = transpose ? nt : ne;
  Eigen::MatrixXd cost(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const FrequencyPoint& t = transpose ? truth[j] : truth[i];
      const FrequencyPoint& e = transpose ? est[i] : est[j];
      cost(i, j) = frequency_distance(t, e, use_psi);
    }
  }
  const std::vector<int> assign = hungarian(cost);
  std::vector<char> true_used(static_cast<std::size_t>(nt), 0), est_used(static_cast<std::size_t>(ne), 0);
  for (int i = 0; i < rows; ++i) {
    const int ti = transpose ? assign[i] : i;
    const int ei = transpose ? i : assign[i];
    out.pairs.emplace_back(ti, ei);
    out.cost += cost(i, assign[i]);
    true_used[ti] = 1;
    est_used[ei] = 1;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  for (int i = 0; i < nt; ++i) {
    if (!true_used[i]) out.unmatched_true.push_back(i);
  }
  for (int j = 0; j < ne; ++j) {
    if (!est_used[j]) out.unmatched_est.push_back(j);
  }
  return out;
}

double mse_angles(const MatchedPairs& pairs, std::span<const double> true_theta,
                  std::span<const double> est_theta, const MetricOptions& options) {
  if (pairs.pairs.empty()) throw NoMatches();
  const double unit = options.angles_in_degrees ? 180.0 / kPi : 1.0;
  double sum = 0.0;
  for (const auto& [t, e] : pairs.pairs) {
    const double err = (true_theta[static_cast<std::size_t>(t)] - est_theta[static_cast<std::size_t>(e)]) * unit;
    sum += err * err;
  }
  const double penalty = 0.5 * kPi * unit;
  sum += static_cast<double>(pairs.unmatched_true.size()) * penalty * penalty;
  if (options.normalize_by_paths) {
    sum /= static_cast<double>(pairs.pairs.size() + pairs.unmatched_true.size());
  }
  return to_db(sum);
}

double nmse_distance(const MatchedPairs& pairs, std::span<const double> true_r,
                     std::span<const double> est_r, double r_max) {
  if (pairs.pairs.empty()) throw NoMatches();
  double num = 0.0;
  for (const auto& [t, e] : pairs.pairs) {
    const double rt = true_r[static_cast<std::size_t>(t)];
    const double re = est_r[static_cast<std::size_t>(e)];
    const double err = (std::isinf(re) && std::isfinite(rt)) ? r_max : rt - re;
    num += err * err;
  }
  num += static_cast<double>(pairs.unmatched_true.size()) * r_max * r_max;
  double den = 0.0;
  for (double r : true_r) den += r * r;
  if (!(den > 0.0)) throw ZeroReference();
  return to_db(num / den);
}

}  // namespace nfsgvb
