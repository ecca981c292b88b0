// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/math_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nfsgvb/error.hpp"

namespace nfsgvb {

VonMisesParams VonMisesParams::make(double mu, double kappa) {
  if (!std::isfinite(mu) || !(kappa >= 0.0)) {
    throw std::invalid_argument("von Mises parameters must have finite mu and kappa >= 0");
  }
  return {wrap_angle(mu), kappa};
}

void LogLinearCircularDensity::validate() const {
  if (coeffs.size() != exponents.size()) {
    throw std::invalid_argument("coeffs and exponents differ in length");
  }
  if (coeffs.empty()) throw std::invalid_argument("empty log-linear density");
  for (int g : exponents) {
    if (g < 0) throw std::invalid_argument("negative exponent in log-linear density");
  }
}

namespace {

// Above this kappa (scaled with n_max^2) the Hankel expansion is used.
double asymptotic_threshold(int n_max) {
  const double n = static_cast<double>(n_max);
  return std::max(1000.0, 2.0 * n * n);
}

// I_nu / I_{nu-1} from the ascending series, for moderate kappa.
double top_ratio_series(int nu, double kappa) {
  const double q = 0.25 * kappa * kappa;
  auto series = [&](int order) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 100000; ++k) {
      term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return sum;
  };
  return 0.5 * kappa / static_cast<double>(nu) * series(nu) / series(nu - 1);
}

// I_nu / I_{nu-1} by modified Lentz on 1/(b0 + 1/(b1 + ...)), b_j = 2(nu+j)/kappa.
double top_ratio_lentz(int nu, double kappa) {
  constexpr double tiny = 1e-300;
  double f = 2.0 * nu / kappa;
  if (f == 0.0) f = tiny;
  double c = f;
  double d = 0.0;
  for (int j = 1; j < 50000000; ++j) {
    const double b = 2.0 * (nu + j) / kappa;
    d = b + d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

// Sum of the Hankel large-argument series for e^{-x} sqrt(2 pi x) I_n(x).
double hankel_sum(int n, double x) {
  const double mu = 4.0 * static_cast<double>(n) * static_cast<double>(n);
  double term = 1.0;
  double sum = 1.0;
  double prev_abs = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * x);
    if (std::abs(next) > prev_abs) break;  // asymptotic series started diverging
    prev_abs = std::abs(next);
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

std::vector<double> bessel_ratios(int n_max, double kappa) {
  if (n_max < 0) throw std::invalid_argument("bessel_ratios: negative order");
  if (!(kappa >= 0.0) || std::isnan(kappa)) throw std::invalid_argument("bessel_ratios: kappa < 0");
  std::vector<double> d(static_cast<std::size_t>(n_max) + 1, 0.0);
  d[0] = 1.0;
  if (n_max == 0) return d;
  if (kappa == 0.0) return d;
  if (std::isinf(kappa)) {
    std::fill(d.begin(), d.end(), 1.0);
    return d;
  }

  if (kappa > asymptotic_threshold(n_max)) {
    const double s0 = hankel_sum(0, kappa);
    for (int n = 1; n <= n_max; ++n) {
      d[n] = std::clamp(hankel_sum(n, kappa) / s0, 0.0, 1.0);
    }
    return d;
  }

  // Downward recurrence r_k = 1 / (2k/kappa + r_{k+1}) seeded at the top.
  const int top = n_max;
  std::vector<double> r(static_cast<std::size_t>(top) + 1, 0.0);
  r[top] = kappa <= 50.0 ? top_ratio_series(top, kappa) : top_ratio_lentz(top, kappa);
  for (int k = top - 1; k >= 1; --k) {
    r[k] = 1.0 / (2.0 * k / kappa + r[k + 1]);
  }
  double prod = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    prod *= r[n];
    d[n] = prod;
  }
  return d;
}

double bessel_ratio(int n, double kappa) {
  if (n < 0) throw std::invalid_argument("bessel_ratio: negative order");
  return bessel_ratios(n, kappa)[static_cast<std::size_t>(n)];
}

cplx von_mises_moment(const VonMisesParams& params, int n) {
  const int an = std::abs(n);
  return bessel_ratio(an, params.kappa) * std::polar(1.0, static_cast<double>(n) * params.mu);
}

void expected_steering_into(const VonMisesParams& params, std::span<const int> exponents,
                            CVec& out) {
  int gmax = 0;
  for (int g : exponents) gmax = std::max(gmax, std::abs(g));
  const std::vector<double> ratio = bessel_ratios(gmax, params.kappa);
  std::vector<cplx> table(static_cast<std::size_t>(gmax) + 1);
  for (int k = 0; k <= gmax; ++k) {
    table[k] = ratio[k] * std::polar(1.0, static_cast<double>(k) * params.mu);
  }
  out.resize(static_cast<Eigen::Index>(exponents.size()));
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const int g = exponents[i];
    out[static_cast<Eigen::Index>(i)] = g >= 0 ? table[g] : std::conj(table[-g]);
  }
}

CVec expected_steering(const VonMisesParams& params, std::span<const int> exponents) {
  CVec out;
  expected_steering_into(params, exponents, out);
  return out;
}

PhasePolynomial::PhasePolynomial(std::span<const cplx> coeffs, std::span<const int> exponents,
                                 int sign)
    : sign_(sign >= 0 ? 1 : -1) {
  if (coeffs.size() != exponents.size()) {
    throw std::invalid_argument("PhasePolynomial: length mismatch");
  }
  std::vector<std::size_t> order(coeffs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return exponents[a] < exponents[b]; });
  for (std::size_t idx : order) {
    const int g = exponents[idx];
    if (exps_.empty() || exps_.back() != g) {
      exps_.push_back(g);
      weights_.push_back(std::conj(coeffs[idx]));
    } else {
      weights_.back() += std::conj(coeffs[idx]);
    }
  }
  for (std::size_t t = 0; t < exps_.size(); ++t) {
    max_abs_exp_ = std::max(max_abs_exp_, std::abs(exps_[t]));
    max_abs_weight_ = std::max(max_abs_weight_, std::abs(weights_[t]));
    weight_mass_ += std::abs(weights_[t]);
  }
}

bool PhasePolynomial::all_zero() const {
  return std::all_of(weights_.begin(), weights_.end(), [](cplx w) { return w == cplx{}; });
}

double PhasePolynomial::value(double x) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < exps_.size(); ++t) {
    const cplx z = std::polar(1.0, sign_ * exps_[t] * x);
    acc += (weights_[t] * z).real();
  }
  return acc;
}

PhaseDerivs PhasePolynomial::derivs(double x) const {
  PhaseDerivs out;
  for (std::size_t t = 0; t < exps_.size(); ++t) {
    const double g = exps_[t];
    const cplx wz = weights_[t] * std::polar(1.0, sign_ * g * x);
    out.value += wz.real();
    out.d1 -= sign_ * g * wz.imag();
    out.d2 -= g * g * wz.real();
  }
  return out;
}

std::vector<double> PhasePolynomial::grid_values(double x0, double dx, std::size_t count) const {
  std::vector<double> out(count, 0.0);
  const std::size_t nt = exps_.size();
  if (nt == 0 || count == 0) return out;
  // Structure-of-arrays phasor recurrence, reseeded periodically to bound drift.
  std::vector<double> zr(nt), zi(nt), wr(nt), wi(nt), cr(nt), ci(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const double step = sign_ * exps_[t] * dx;
    wr[t] = std::cos(step);
    wi[t] = std::sin(step);
    cr[t] = weights_[t].real();
    ci[t] = weights_[t].imag();
  }
  constexpr std::size_t kReseed = 256;
  for (std::size_t m = 0; m < count; ++m) {
    if (m % kReseed == 0) {
      const double x = x0 + static_cast<double>(m) * dx;
      for (std::size_t t = 0; t < nt; ++t) {
        const double ph = sign_ * exps_[t] * x;
        zr[t] = std::cos(ph);
        zi[t] = std::sin(ph);
      }
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      acc += cr[t] * zr[t] - ci[t] * zi[t];
      const double nr = zr[t] * wr[t] - zi[t] * wi[t];
      const double ni = zr[t] * wi[t] + zi[t] * wr[t];
      zr[t] = nr;
      zi[t] = ni;
    }
    out[m] = acc;
  }
  return out;
}

VonMisesParams fit_von_mises(const LogLinearCircularDensity& density,
                             std::optional<VonMisesParams> prior, VonMisesFitInfo* info) {
  density.validate();
  std::vector<cplx> coeffs = density.coeffs;
  std::vector<int> exps = density.exponents;
  if (prior && prior->kappa > 0.0) {
    // kappa_p cos(x - mu_p) = Re conj(kappa_p e^{j mu_p}) e^{j x}
    coeffs.push_back(std::polar(prior->kappa, prior->mu));
    exps.push_back(1);
  }
  const PhasePolynomial f(coeffs, exps, 1);
  if (f.all_zero()) throw AllZeroCoefficients();

  const std::size_t m_grid = static_cast<std::size_t>(std::max(4 * f.max_abs_exponent(), 512));
  const double dx = kTwoPi / static_cast<double>(m_grid);
  const std::vector<double> vals = f.grid_values(-kPi, dx, m_grid);
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(vals.begin(), vals.end()) - vals.begin());

  const double x_grid = -kPi + static_cast<double>(best) * dx;
  double x = x_grid;
  double fx = vals[best];
  int steps = 0;
  bool fell_back = false;
  // Round-off allowance for the ascent check.
  const double slack = 1e-12 * f.weight_mass();
  for (int it = 0; it < 8; ++it) {
    const PhaseDerivs d = f.derivs(x);
    if (!(d.d2 < 0.0)) break;
    const double step = -d.d1 / d.d2;
    const double xn = x + step;
    const double fn = f.value(xn);
    if (std::abs(xn - x_grid) > dx || fn < fx - slack) {
      x = x_grid;
      fell_back = true;
      break;
    }
    x = xn;
    fx = fn;
    ++steps;
    if (std::abs(step) < 1e-12) break;
  }

  const double curvature = f.derivs(x).d2;
  double kappa = -curvature;
  if (!std::isfinite(kappa)) kappa = kKappaMin;
  kappa = std::clamp(kappa, kKappaMin, kKappaMax);
  if (info) {
    info->newton_steps = steps;
    info->fell_back_to_grid = fell_back;
    info->curvature = curvature;
  }
  return {wrap_angle(x), kappa};
}

}  // namespace nfsgvb
