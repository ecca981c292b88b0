// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "nfsgvb/error.hpp"
#include "nfsgvb/math_kernels.hpp"
#include "oracles.hpp"

using namespace nfsgvb;

TEST_CASE("bessel ratio special values") {
  CHECK(bessel_ratio(0, 0.0) == 1.0);
  CHECK(bessel_ratio(0, 123.4) == 1.0);
  CHECK(bessel_ratio(0, 1e9) == 1.0);
  for (int n : {1, 2, 7, 255}) CHECK(bessel_ratio(n, 0.0) == 0.0);
  CHECK(bessel_ratio(1, 2.0) == doctest::Approx(oracle::bessel_ratio_series(1, 2.0)).epsilon(1e-13));
  CHECK(bessel_ratio(1, 2.0) == doctest::Approx(0.697774657964).epsilon(1e-10));
}

TEST_CASE("bessel ratio against the power series") {
  for (double kappa : {1e-8, 1e-3, 0.5, 3.0, 17.0, 49.9, 50.1, 120.0, 400.0}) {
    const std::vector<double> all = bessel_ratios(64, kappa);
    REQUIRE(all.size() == 65);
    for (int n : {1, 2, 5, 16, 33, 64}) {
      const double ref = oracle::bessel_ratio_series(n, kappa);
      CAPTURE(kappa);
      CAPTURE(n);
      CHECK(bessel_ratio(n, kappa) == doctest::Approx(ref).epsilon(1e-11));
      CHECK(all[static_cast<std::size_t>(n)] == doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("bessel ratio stays in (0, 1) and decreases in n up to kappa 1e9") {
  for (double kappa : {50.0, 1e3, 2e5, 1e7, 1e9}) {
    const std::vector<double> r = bessel_ratios(255, kappa);
    for (int n = 1; n <= 255; ++n) {
      CAPTURE(kappa);
      CAPTURE(n);
      REQUIRE(std::isfinite(r[n]));
      CHECK(r[n] > 0.0);
      CHECK(r[n] < 1.0);
      CHECK(r[n] < r[n - 1]);
    }
  }
  // Small kappa: high orders fall below the smallest double and flush to zero.
  for (double kappa : {1e-6, 1.0}) {
    const std::vector<double> r = bessel_ratios(255, kappa);
    for (int n = 1; n <= 255; ++n) {
      CAPTURE(kappa);
      CAPTURE(n);
      REQUIRE(std::isfinite(r[n]));
      CHECK(r[n] >= 0.0);
      CHECK(r[n] < 1.0);
      CHECK(r[n] <= r[n - 1]);
      if (n <= 20) CHECK(r[n] == doctest::Approx(oracle::bessel_ratio_series(n, kappa)).epsilon(1e-11));
    }
  }
  // Large-argument behaviour: 1 - n^2 / (2 kappa).
  CHECK(1.0 - bessel_ratio(1, 1e9) == doctest::Approx(0.5e-9).epsilon(1e-3));
}

TEST_CASE("von Mises moments") {
  const cplx limit = von_mises_moment(VonMisesParams::make(0.3, 1e12), 5);
  CHECK(std::abs(limit - std::polar(1.0, 1.5)) < 1e-6);
  CHECK(std::abs(von_mises_moment(VonMisesParams::make(0.8, 0.0), 1)) == 0.0);
  CHECK(von_mises_moment(VonMisesParams::make(0.8, 5.0), 0) == cplx(1.0, 0.0));

  const cplx ref = oracle::von_mises_moment_quadrature(1.0, 3.0, 2);
  CHECK(std::abs(von_mises_moment(VonMisesParams::make(1.0, 3.0), 2) - ref) < 1e-8);

  // Negative orders are conjugates.
  const VonMisesParams p = VonMisesParams::make(-2.0, 7.5);
  CHECK(std::abs(von_mises_moment(p, -3) - std::conj(von_mises_moment(p, 3))) < 1e-15);
}

TEST_CASE("von Mises parameter validation") {
  CHECK_THROWS_AS(VonMisesParams::make(0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(VonMisesParams::make(0.0, std::nan("")), std::invalid_argument);
  const VonMisesParams p = VonMisesParams::make(3.0 * oracle::kPi, 1.0);
  CHECK(p.mu >= -oracle::kPi);
  CHECK(p.mu < oracle::kPi);
  CHECK(std::abs(p.mu - (-oracle::kPi)) < 1e-12);
}

TEST_CASE("expected steering vector") {
  std::vector<int> g(8);
  for (int i = 0; i < 8; ++i) g[i] = i;

  const CVec point = expected_steering(VonMisesParams::make(0.4, 1e12), g);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(point[i] - std::polar(1.0, 0.4 * i)) < 1e-6);

  const CVec flat = expected_steering(VonMisesParams::make(0.4, 0.0), g);
  CHECK(flat[0] == cplx(1.0, 0.0));
  for (int i = 1; i < 8; ++i) CHECK(std::abs(flat[i]) == 0.0);

  const std::vector<int> g4{0, 1, 2, 3};
  const CVec e = expected_steering(VonMisesParams::make(0.5, 100.0), g4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(e[i] - oracle::von_mises_moment_local(0.5, 100.0, i)) < 1e-8);
}

TEST_CASE("moments match quadrature on random instances") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mu_dist(-oracle::kPi, oracle::kPi);
  std::uniform_real_distribution<double> log_kappa(-3.0, 4.0);
  std::uniform_int_distribution<int> order(0, 64);
  for (int t = 0; t < 40; ++t) {
    const double mu = mu_dist(gen);
    const double kappa = std::pow(10.0, log_kappa(gen));
    const int n = order(gen);
    const cplx ref = oracle::von_mises_moment_local(mu, kappa, n);
    const cplx got = von_mises_moment(VonMisesParams::make(mu, kappa), n);
    CAPTURE(mu);
    CAPTURE(kappa);
    CAPTURE(n);
    CHECK(std::abs(got - ref) <= 1e-7 * std::max(std::abs(ref), 1e-3));
  }
}

TEST_CASE("fit_von_mises on a single tone") {
  // f(x) = Re conj(c_1) e^{jx} = A cos(x - w0) for c_1 = A e^{j w0}.
  const double a = 2.5, w0 = 0.9;
  LogLinearCircularDensity d{{cplx(0.0), std::polar(a, w0)}, {0, 1}};
  const VonMisesParams p = fit_von_mises(d);
  CHECK(p.mu == doctest::Approx(w0).epsilon(1e-10));
  CHECK(p.kappa == doctest::Approx(a).epsilon(1e-8));
}

TEST_CASE("fit_von_mises rejects all-zero coefficients") {
  LogLinearCircularDensity d{{cplx(0.0), cplx(0.0), cplx(0.0)}, {0, 1, 2}};
  CHECK_THROWS_AS(fit_von_mises(d), AllZeroCoefficients);
}

TEST_CASE("fit_von_mises on a noiseless array correlation matches a dense scan") {
  const int n = 32;
  const double w_true = 0.7, s = 4e-3;
  const cplx nu = std::polar(1.3, -0.4);
  LogLinearCircularDensity d;
  for (int i = 0; i < n; ++i) {
    const cplx curv = std::polar(1.0, i * (n - 1 - i) * s);
    const cplx y = nu * std::polar(1.0, w_true * i) * curv;
    d.coeffs.push_back(std::conj(nu) * y * std::conj(curv));
    d.exponents.push_back(i);
  }
  const auto f = [&](double x) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += (std::conj(d.coeffs[i]) * std::polar(1.0, i * x)).real();
    return v;
  };
  const double dense = oracle::grid_argmax(f, -oracle::kPi, oracle::kPi, 1000001);
  const VonMisesParams p = fit_von_mises(d);
  CHECK(std::abs(p.mu - w_true) < 1e-4);
  CHECK(std::abs(p.mu - dense) < 1e-5);
}

TEST_CASE("phase polynomial derivatives against finite differences") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-oracle::kPi, oracle::kPi);
  for (int t = 0; t < 100; ++t) {
    const int len = 16;
    std::vector<cplx> c(len);
    std::vector<int> g(len);
    for (int i = 0; i < len; ++i) {
      c[i] = {nd(gen), nd(gen)};
      g[i] = i * (t % 3 == 0 ? 1 : (len - 1 - i)) - (t % 2 ? 0 : 3);
    }
    const int sign = t % 2 ? 1 : -1;
    const PhasePolynomial poly(c, g, sign);
    const double x = ud(gen);
    const auto f = [&](double v) { return poly.value(v); };
    const PhaseDerivs d = poly.derivs(x);
    const double gmax = std::max(1, poly.max_abs_exponent());
    const double fd1 = oracle::diff1(f, x, 1e-4 / gmax);
    const double fd2 = oracle::diff2(f, x, 1e-3 / gmax);
    // Relative error, with a floor at 1e-3 of the derivative's natural scale.
    const double w = poly.weight_mass();
    CHECK(std::abs(d.value - poly.value(x)) < 1e-12 * std::max(1.0, w));
    CHECK(std::abs(d.d1 - fd1) <= 1e-5 * std::max(std::abs(fd1), 1e-3 * w * gmax));
    CHECK(std::abs(d.d2 - fd2) <= 1e-5 * std::max(std::abs(fd2), 1e-3 * w * gmax * gmax));
  }
}

TEST_CASE("phase polynomial grid values match pointwise evaluation") {
  std::vector<cplx> c{{1.0, 0.5}, {-0.3, 2.0}, {0.0, -1.0}, {0.7, 0.7}};
  std::vector<int> g{0, 3, 3, 40};
  const PhasePolynomial poly(c, g, -1);
  CHECK(poly.term_count() == 3);
  const std::vector<double> grid = poly.grid_values(-1.0, 1e-3, 2000);
  for (std::size_t m = 0; m < grid.size(); m += 97) {
    CHECK(grid[m] == doctest::Approx(poly.value(-1.0 + 1e-3 * m)).epsilon(1e-12));
  }
}
