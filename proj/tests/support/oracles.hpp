// SPDX-License-Identifier: Apache-2.0
// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical kernels.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// I_n(x) by its ascending power series in long double.
inline long double bessel_i_series(int n, long double x) {
  long double term = 1.0L;
  for (int k = 1; k <= n; ++k) term *= (x / 2.0L) / k;
  long double sum = term;
  const long double q = x * x / 4.0L;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (static_cast<long double>(k) * (k + n));
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  return sum;
}

// I_n(x)/I_0(x) from the series; adequate for x up to a few hundred.
inline double bessel_ratio_series(int n, double x) {
  return static_cast<double>(bessel_i_series(n, x) / bessel_i_series(0, x));
}

// E[e^{j n theta}] under von Mises(mu, kappa) by the trapezoid rule. Scaled by
// e^{-kappa} so that large kappa stays finite.
inline cplx von_mises_moment_quadrature(double mu, double kappa, int n, int points = 100000) {
  cplx num = 0.0;
  double den = 0.0;
  for (int i = 0; i < points; ++i) {
    const double th = -kPi + 2.0 * kPi * i / points;
    const double w = std::exp(kappa * (std::cos(th - mu) - 1.0));
    num += w * std::polar(1.0, n * th);
    den += w;
  }
  return num / den;
}

// Adaptive quadrature for large kappa: integrate over mu +- width where the mass lives.
inline cplx von_mises_moment_local(double mu, double kappa, int n, int points = 400001) {
  const double width = std::min(kPi, 40.0 / std::sqrt(std::max(kappa, 1e-12)));
  cplx num = 0.0;
  double den = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = -width + 2.0 * width * i / (points - 1);
    const double c = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    const double w = c * std::exp(kappa * (std::cos(t) - 1.0));
    num += w * std::polar(1.0, n * (mu + t));
    den += w;
  }
  return num / den;
}

// Argmax of f over a uniform grid on [lo, hi] with `points` samples.
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi, int points) {
  double best_x = lo;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

// Repeated grid search that shrinks the window around the incumbent.
inline double zoom_argmax(const std::function<double(double)>& f, double lo, double hi, int points = 2001,
                          int rounds = 6) {
  double x = grid_argmax(f, lo, hi, points);
  double half = (hi - lo) / (points - 1);
  for (int r = 0; r < rounds; ++r) {
    const double a = std::max(lo, x - 2.0 * half);
    const double b = std::min(hi, x + 2.0 * half);
    x = grid_argmax(f, a, b, points);
    half = (b - a) / (points - 1);
  }
  return x;
}

struct Argmax2 {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

// Two-dimensional dense grid followed by shrinking-window grids.
inline Argmax2 zoom_argmax_2d(const std::function<double(double, double)>& f, double x_lo, double x_hi, double y_lo,
                              double y_hi, int nx, int ny, int rounds = 8) {
  Argmax2 best{x_lo, y_lo, -std::numeric_limits<double>::infinity()};
  double hx = (x_hi - x_lo) / (nx - 1);
  double hy = (y_hi - y_lo) / (ny - 1);
  auto scan = [&](double ax, double bx, double ay, double by) {
    for (int i = 0; i < nx; ++i) {
      const double x = ax + (bx - ax) * i / (nx - 1);
      for (int j = 0; j < ny; ++j) {
        const double y = ay + (by - ay) * j / (ny - 1);
        const double v = f(x, y);
        if (v > best.value) best = {x, y, v};
      }
    }
  };
  scan(x_lo, x_hi, y_lo, y_hi);
  for (int r = 0; r < rounds; ++r) {
    const double ax = std::max(x_lo, best.x - 2.0 * hx), bx = std::min(x_hi, best.x + 2.0 * hx);
    const double ay = std::max(y_lo, best.y - 2.0 * hy), by = std::min(y_hi, best.y + 2.0 * hy);
    scan(ax, bx, ay, by);
    hx = (bx - ax) / (nx - 1);
    hy = (by - ay) / (ny - 1);
  }
  return best;
}

// Minimum-cost permutation by exhaustive enumeration (square cost only).
inline double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<int> perm(cost.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost[i][static_cast<std::size_t>(perm[i])];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Element-to-point distance from Cartesian coordinates.
inline double euclid(double x1, double y1, double z1, double x2, double y2, double z2) {
  return std::sqrt((x1 - x2) * (x1 - x2) + (y1 - y2) * (y1 - y2) + (z1 - z2) * (z1 - z2));
}

// Least-squares projection of y onto span(B) via Householder QR.
inline CVec projection(const Eigen::MatrixXcd& b, const CVec& y) {
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(b);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(b.rows(), b.cols());
  return q * (q.adjoint() * y);
}

// Central finite differences of a scalar function.
inline double diff1(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}
inline double diff2(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace oracle

namespace oracle {

// Best-Fisher rejection sampler; a Gaussian for very large concentrations.
template <class Gen>
double sample_von_mises(Gen& gen, double mu, double kappa) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (kappa < 1e-8) return mu + kPi * (2.0 * u(gen) - 1.0);
  if (kappa > 1e6) {
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(kappa));
    return mu + nd(gen);
  }
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  while (true) {
    const double z = std::cos(kPi * u(gen));
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = u(gen);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double sgn = u(gen) > 0.5 ? 1.0 : -1.0;
      return mu + sgn * std::acos(std::clamp(f, -1.0, 1.0));
    }
  }
}

}  // namespace oracle
