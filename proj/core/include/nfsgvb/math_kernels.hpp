// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nfsgvb/types.hpp"

namespace nfsgvb {

struct VonMisesParams {
  double mu = 0.0;     // in [-pi, pi)
  double kappa = 0.0;  // >= 0

  // Wraps mu and rejects negative or non-finite kappa.
  static VonMisesParams make(double mu, double kappa);
};

// Density proportional to exp(Re sum_i conj(coeffs_i) e^{j exponents_i x}).
struct LogLinearCircularDensity {
  std::vector<cplx> coeffs;
  std::vector<int> exponents;

  void validate() const;
};

// I_n(kappa) / I_0(kappa).
double bessel_ratio(int n, double kappa);

// Ratios d_0 .. d_{n_max} in one pass.
std::vector<double> bessel_ratios(int n_max, double kappa);

// E[e^{j n theta}] under a von Mises law.
cplx von_mises_moment(const VonMisesParams& params, int n);

// Entry i equals von_mises_moment(params, exponents[i]).
CVec expected_steering(const VonMisesParams& params, std::span<const int> exponents);
void expected_steering_into(const VonMisesParams& params, std::span<const int> exponents, CVec& out);

struct PhaseDerivs {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Real phase polynomial f(x) = Re sum_i conj(c_i) e^{j sign g_i x}, with terms
// sharing an exponent folded together.
class PhasePolynomial {
 public:
  PhasePolynomial() = default;
  PhasePolynomial(std::span<const cplx> coeffs, std::span<const int> exponents, int sign = 1);

  double value(double x) const;
  PhaseDerivs derivs(double x) const;

  // f at x0 + m*dx for m = 0..count-1.
  std::vector<double> grid_values(double x0, double dx, std::size_t count) const;

  bool all_zero() const;
  int max_abs_exponent() const { return max_abs_exp_; }
  double max_abs_weight() const { return max_abs_weight_; }
  // Sum of folded weight moduli, an upper bound on |f|.
  double weight_mass() const { return weight_mass_; }
  std::size_t term_count() const { return exps_.size(); }

 private:
  std::vector<int> exps_;
  std::vector<cplx> weights_;  // folded conj(c)
  int sign_ = 1;
  int max_abs_exp_ = 0;
  double max_abs_weight_ = 0.0;
  double weight_mass_ = 0.0;
};

inline constexpr double kKappaMin = 1e-6;
inline constexpr double kKappaMax = 1e10;

struct VonMisesFitInfo {
  int newton_steps = 0;
  bool fell_back_to_grid = false;
  double curvature = 0.0;  // f''(mu) before clamping
};

// Laplace fit at the global mode: grid argmax, Newton polish, curvature match.
// Throws AllZeroCoefficients.
VonMisesParams fit_von_mises(const LogLinearCircularDensity& density,
                             std::optional<VonMisesParams> prior = std::nullopt,
                             VonMisesFitInfo* info = nullptr);

}  // namespace nfsgvb
