// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/sgvb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "nfsgvb/error.hpp"

namespace nfsgvb {

namespace {

// Joint Newton ascent of |x(theta)^H r|^2 over all factor parameters, x = prod_f e^{j sign_f g_if theta_f}.
// The last parameter is kept inside [0, s_max].
void polish_peak(const FactorModel& model, const CVec& r, std::vector<double>& theta, double s_max) {
  const std::size_t k = model.factors.size();
  const Eigen::Index n = r.size();
  Eigen::MatrixXd w(n, static_cast<Eigen::Index>(k));
  for (std::size_t f = 0; f < k; ++f) {
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i, static_cast<Eigen::Index>(f)) = model.factors[f].sign * model.factors[f].exponents[i];
    }
  }
  auto terms = [&](const std::vector<double>& t) {
    CVec z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double ph = 0.0;
      for (std::size_t f = 0; f < k; ++f) ph += w(i, static_cast<Eigen::Index>(f)) * t[f];
      z[i] = std::polar(1.0, -ph) * r[i];
    }
    return z;
  };
  auto power = [&](const std::vector<double>& t) { return std::norm(terms(t).sum()); };

  double f_cur = power(theta);
  for (int it = 0; it < 50; ++it) {
    const CVec z = terms(theta);
    const cplx u = z.sum();
    // du/dt_a = -j sum w_a z, d2u/dt_a dt_b = -sum w_a w_b z.
    Eigen::VectorXcd du(static_cast<Eigen::Index>(k));
    Eigen::MatrixXcd d2u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(k); ++a) {
      du[a] = cplx(0.0, -1.0) * (w.col(a).cast<cplx>().array() * z.array()).sum();
      for (Eigen::Index b = 0; b <= a; ++b) {
        d2u(a, b) = -(w.col(a).array() * w.col(b).array()).cast<cplx>().cwiseProduct(z.array()).sum();
        d2u(b, a) = d2u(a, b);
      }
    }
    Eigen::VectorXd grad(static_cast<Eigen::Index>(k));
    Eigen::MatrixXd hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(k); ++a) {
      grad[a] = 2.0 * (std::conj(u) * du[a]).real();
      for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(k); ++b) {
        hess(a, b) = 2.0 * (std::conj(du[a]) * du[b] + std::conj(u) * d2u(a, b)).real();
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().maxCoeff() < 0.0)) break;
    const Eigen::VectorXd step = -hess.ldlt().solve(grad);
    double scale = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, scale *= 0.5) {
      std::vector<double> cand = theta;
      for (std::size_t f = 0; f < k; ++f) cand[f] += scale * step[static_cast<Eigen::Index>(f)];
      cand[k - 1] = std::clamp(cand[k - 1], 0.0, s_max);
      const double f_new = power(cand);
      if (f_new >= f_cur) {
        const double gain = f_new - f_cur;
        theta = cand;
        f_cur = f_new;
        moved = gain > 1e-15 * f_new;
        break;
      }
    }
    if (!moved) break;
  }
  for (std::size_t f = 0; f + 1 < k; ++f) theta[f] = wrap_angle(theta[f]);
}

}  // namespace

SgvbConfig SgvbConfig::defaults_for(const ArrayGeometry& geom, double r_min, double r_max,
                                    int l_paths) {
  SgvbConfig cfg;
  cfg.l_paths = l_paths;
  cfg.max_iters = geom.kind == ArrayKind::Ula ? 150 : 200;
  cfg.set_distance_range(geom, r_min, r_max);
  return cfg;
}

void SgvbConfig::set_distance_range(const ArrayGeometry& geom, double r_min, double r_max) {
  if (!(r_min > 0.0) || !(r_min <= r_max)) throw InvalidConfig("invalid distance range");
  s_min = geom.curvature_scale() / r_max;
  s_max = geom.curvature_scale() / r_min;
}

void SgvbConfig::validate() const {
  if (l_paths < 1) throw InvalidConfig("sgvb: l_paths must be >= 1");
  if (max_iters < 0) throw InvalidConfig("sgvb: max_iters must be >= 0");
  if (grid_points_k < 8) throw InvalidConfig("sgvb: grid_points_k must be >= 8");
  if (!(newton_step > 0.0 && newton_step <= 1.0)) throw InvalidConfig("sgvb: newton_step must be in (0, 1]");
  if (newton_max_steps < 0) throw InvalidConfig("sgvb: newton_max_steps must be >= 0");
  if (!(s_min >= 0.0) || !(s_max >= s_min)) throw InvalidConfig("sgvb: need 0 <= s_min <= s_max");
  if (a_beta < 0 || b_beta < 0 || a_gamma < 0 || b_gamma < 0) throw InvalidConfig("sgvb: priors must be >= 0");
  if (!(init_phase_budget > 0.0)) throw InvalidConfig("sgvb: init_phase_budget must be positive");
}

CurvatureSearch CurvatureSearch::from(const SgvbConfig& cfg) {
  return {cfg.s_min, cfg.s_max, cfg.grid_points_k, cfg.newton_step, cfg.newton_tol, cfg.newton_max_steps};
}

PhaseDerivs curvature_objective(const CVec& zeta, const SteeringFactor& factor, double s) {
  const PhasePolynomial poly({zeta.data(), static_cast<std::size_t>(zeta.size())}, factor.exponents,
                             factor.sign);
  return poly.derivs(s);
}

double grid_search_s(const CVec& zeta, const SteeringFactor& factor, const CurvatureSearch& search,
                     std::optional<double> warm_start, CurvatureSearchInfo* info) {
  if (static_cast<std::size_t>(zeta.size()) != factor.exponents.size()) {
    throw std::invalid_argument("grid_search_s: zeta and factor lengths differ");
  }
  const PhasePolynomial poly({zeta.data(), static_cast<std::size_t>(zeta.size())}, factor.exponents,
                             factor.sign);
  const int k = std::max(search.grid_points, 1);
  const double span = search.s_max - search.s_min;
  const double ds = (k > 1 && span > 0.0) ? span / (k - 1) : 0.0;
  const std::size_t count = ds > 0.0 ? static_cast<std::size_t>(k) : 1;
  const std::vector<double> vals = poly.grid_values(search.s_min, ds, count);

  std::size_t best = 0;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    if (vals[i] > vals[best]) best = i;
  }
  double coarse = search.s_min + static_cast<double>(best) * ds;
  double f_coarse = vals[best];
  const double f_zero = poly.value(0.0);
  if (f_zero > f_coarse) {
    coarse = 0.0;
    f_coarse = f_zero;
  }

  double start = coarse;
  double f_start = f_coarse;
  if (warm_start && *warm_start >= 0.0 && *warm_start <= search.s_max) {
    const double fw = poly.value(*warm_start);
    if (fw > f_start) {
      start = *warm_start;
      f_start = fw;
    }
  }

  double s = start;
  PhaseDerivs d = poly.derivs(s);
  int steps = 0;
  for (; steps < search.max_steps;) {
    if (!(d.d2 < 0.0)) break;
    const double sn = s - search.step * d.d1 / d.d2;
    const PhaseDerivs dn = poly.derivs(sn);
    ++steps;
    const double change = std::abs(dn.value - d.value);
    s = sn;
    d = dn;
    if (change < search.tol) break;
  }

  const double lo = std::min(start, search.s_min);
  bool fell_back = false;
  if (!(s >= lo && s <= search.s_max) || d.value < f_start - 1e-12 * poly.weight_mass() ||
      !std::isfinite(s)) {
    s = start;
    fell_back = true;
  }
  s = std::clamp(s, 0.0, search.s_max);
  if (info) {
    info->coarse = coarse;
    info->newton_steps = steps;
    info->fell_back = fell_back;
  }
  return s;
}

SgvbEstimator::SgvbEstimator(const ArrayGeometry& geom, SgvbConfig config)
    : geom_(geom), cfg_(config), model_(factor_model(geom)), search_(CurvatureSearch::from(config)) {
  geom_.validate();
  cfg_.validate();

  const int nh = geom_.kind == ArrayKind::Ula ? geom_.n_total : geom_.n_h;
  const int nv = geom_.kind == ArrayKind::Ula ? 1 : geom_.n_v;
  const int mh = 4 * nh;
  const int mv = geom_.kind == ArrayKind::Ula ? 1 : 4 * nv;
  dft_h_.resize(mh, nh);
  for (int p = 0; p < mh; ++p) {
    const double w = -kPi + kTwoPi * p / mh;
    for (int m = 0; m < nh; ++m) dft_h_(p, m) = std::polar(1.0, -w * m);
  }
  dft_v_.resize(mv, nv);
  for (int q = 0; q < mv; ++q) {
    const double w = mv > 1 ? -kPi + kTwoPi * q / mv : 0.0;
    for (int n = 0; n < nv; ++n) dft_v_(q, n) = std::polar(1.0, -w * n);
  }

  int gmax = 0;
  for (int g : model_.curvature().exponents) gmax = std::max(gmax, g);
  const double span = cfg_.s_max - cfg_.s_min;
  int j = 1;
  if (span > 0.0) {
    j = static_cast<int>(std::ceil(span * gmax / cfg_.init_phase_budget)) + 1;
    j = std::clamp(j, 2, cfg_.grid_points_k);
  }
  init_s_grid_.push_back(0.0);
  for (int i = 0; i < j; ++i) {
    init_s_grid_.push_back(j > 1 ? cfg_.s_min + span * i / (j - 1) : cfg_.s_min);
  }
}

CVec SgvbEstimator::path_product(const PathVariational& path) const {
  CVec x = path.cache[0];
  for (std::size_t f = 1; f < path.cache.size(); ++f) x.array() *= path.cache[f].array();
  return x;
}

CVec SgvbEstimator::others_product(const PathVariational& path, std::size_t skip) const {
  CVec x = CVec::Ones(geom_.n_total);
  for (std::size_t f = 0; f < path.cache.size(); ++f) {
    if (f != skip) x.array() *= path.cache[f].array();
  }
  return x;
}

void SgvbEstimator::refresh_caches(PathVariational& path) const {
  const std::size_t nf = model_.frequency_count();
  path.cache.resize(nf + 1);
  for (std::size_t f = 0; f < nf; ++f) {
    expected_steering_into(path.freq[f], model_.factors[f].exponents, path.cache[f]);
  }
  model_.curvature().evaluate_into(path.s_hat, path.cache[nf]);
}

PathVariational SgvbEstimator::make_path(const PathParams& params, double kappa, double tau_nu,
                                         double beta_hat) const {
  PathVariational path;
  path.freq.push_back(VonMisesParams::make(params.omega, kappa));
  if (model_.frequency_count() > 1) path.freq.push_back(VonMisesParams::make(params.psi, kappa));
  path.s_hat = params.s;
  path.nu_hat = params.gain;
  path.tau_nu = tau_nu;
  path.beta_hat = beta_hat;
  refresh_caches(path);
  return path;
}

SgvbEstimator::Peak SgvbEstimator::coarse_peak(const CVec& residual) const {
  const int nh = static_cast<int>(dft_h_.cols());
  const int nv = static_cast<int>(dft_v_.cols());
  const auto& m_idx = model_.factors[0].exponents;
  const bool two_d = model_.frequency_count() > 1;
  const SteeringFactor& curv = model_.curvature();

  Peak best;
  best.freq.assign(model_.frequency_count(), 0.0);
  double best_power = -1.0;
  CMat grid(nh, nv);
  for (double s : init_s_grid_) {
    grid.setZero();
    for (int i = 0; i < geom_.n_total; ++i) {
      const int n = two_d ? model_.factors[1].exponents[i] : 0;
      grid(m_idx[i], n) += residual[i] * std::polar(1.0, -curv.sign * curv.exponents[i] * s);
    }
    const CMat spec = dft_h_ * grid * dft_v_.transpose();
    for (Eigen::Index q = 0; q < spec.cols(); ++q) {
      for (Eigen::Index p = 0; p < spec.rows(); ++p) {
        const double pw = std::norm(spec(p, q));
        if (pw > best_power) {
          best_power = pw;
          best.s = s;
          best.freq[0] = -kPi + kTwoPi * static_cast<double>(p) / static_cast<double>(spec.rows());
          if (two_d) {
            best.freq[1] = -kPi + kTwoPi * static_cast<double>(q) / static_cast<double>(spec.cols());
          }
        }
      }
    }
  }
  return best;
}

void SgvbEstimator::greedy_refine(const CVec& residual, Peak& peak, cplx& gain) const {
  const std::size_t nf = model_.frequency_count();
  const double n = geom_.n_total;
  std::vector<CVec> point(nf + 1);
  auto rebuild = [&]() {
    for (std::size_t f = 0; f < nf; ++f) model_.factors[f].evaluate_into(peak.freq[f], point[f]);
    model_.curvature().evaluate_into(peak.s, point[nf]);
  };
  auto product_except = [&](std::size_t skip) {
    CVec x = CVec::Ones(geom_.n_total);
    for (std::size_t f = 0; f <= nf; ++f) {
      if (f != skip) x.array() *= point[f].array();
    }
    return x;
  };
  rebuild();
  gain = product_except(nf + 1).dot(residual) / n;
  for (int round = 0; round < cfg_.init_refine_rounds; ++round) {
    if (gain == cplx{}) break;
    const CVec others_s = product_except(nf);
    const CVec zeta = std::conj(gain) * (others_s.conjugate().array() * residual.array()).matrix();
    peak.s = grid_search_s(zeta, model_.curvature(), search_, peak.s);
    rebuild();
    gain = product_except(nf + 1).dot(residual) / n;
    for (std::size_t f = 0; f < nf; ++f) {
      const CVec others = product_except(f);
      LogLinearCircularDensity dens;
      dens.coeffs.resize(static_cast<std::size_t>(geom_.n_total));
      for (int i = 0; i < geom_.n_total; ++i) {
        dens.coeffs[i] = std::conj(gain) * std::conj(others[i]) * residual[i];
      }
      dens.exponents = model_.factors[f].exponents;
      try {
        peak.freq[f] = fit_von_mises(dens).mu;
      } catch (const AllZeroCoefficients&) {
        continue;
      }
      rebuild();
      gain = product_except(nf + 1).dot(residual) / n;
    }
  }
  std::vector<double> theta = peak.freq;
  theta.push_back(peak.s);
  polish_peak(model_, residual, theta, cfg_.s_max);
  for (std::size_t f = 0; f < nf; ++f) peak.freq[f] = theta[f];
  peak.s = theta[nf];
  rebuild();
  gain = product_except(nf + 1).dot(residual) / n;
}

EstimatorState SgvbEstimator::initialize(const CVec& y) const {
  if (y.size() != geom_.n_total) throw std::invalid_argument("observation length does not match array");
  const std::size_t nf = model_.frequency_count();
  const double n = geom_.n_total;

  EstimatorState state;
  state.y = y;
  CVec eps = y;
  for (int l = 0; l < cfg_.l_paths; ++l) {
    Peak peak = coarse_peak(eps);
    cplx gain{};
    greedy_refine(eps, peak, gain);
    PathParams p;
    p.omega = peak.freq[0];
    if (nf > 1) p.psi = peak.freq[1];
    p.s = peak.s;
    p.gain = gain;
    PathVariational path = make_path(p, kKappaMax, 1.0, 1.0);
    eps -= gain * path_product(path);
    state.paths.push_back(std::move(path));
  }
  state.gamma_hat = std::clamp(n / std::max(eps.squaredNorm(), 1e-12), kGammaMin, kGammaMax);

  // Concentrations from the curvature of each path's de-peeled frequency density.
  for (PathVariational& path : state.paths) {
    const CVec x = path_product(path);
    const CVec r = eps + path.nu_hat * x;
    for (std::size_t f = 0; f < nf; ++f) {
      const CVec others = others_product(path, f);
      LogLinearCircularDensity dens;
      dens.coeffs.resize(static_cast<std::size_t>(geom_.n_total));
      for (int i = 0; i < geom_.n_total; ++i) {
        dens.coeffs[i] = 2.0 * state.gamma_hat * std::conj(path.nu_hat) * std::conj(others[i]) * r[i];
      }
      dens.exponents = model_.factors[f].exponents;
      try {
        path.freq[f] = fit_von_mises(dens);
      } catch (const AllZeroCoefficients&) {
        path.freq[f].kappa = kKappaMin;
      }
    }
    const double tau0 = 1.0 / (n * state.gamma_hat);
    path.beta_hat = (cfg_.a_beta + 1.0) / (cfg_.b_beta + std::norm(path.nu_hat) + tau0);
    path.tau_nu = 1.0 / (n * state.gamma_hat + path.beta_hat);
  }
  for (PathVariational& path : state.paths) refresh_caches(path);
  state.residual = residual_from_scratch(state);
  state.history.push_back(state.residual.norm());
  record(state);
  return state;
}

UpdateStatus SgvbEstimator::update_frequency(EstimatorState& state, int l,
                                             FrequencyFactor factor) const {
  const std::size_t f = static_cast<std::size_t>(factor);
  if (f >= model_.frequency_count()) throw std::invalid_argument("frequency factor not in model");
  PathVariational& path = state.paths.at(static_cast<std::size_t>(l));
  if (path.nu_hat == cplx{}) {
    ++state.skipped_updates;
    return UpdateStatus::Skipped;
  }
  const CVec others = others_product(path, f);
  const CVec& old = path.cache[f];
  const cplx scale = 2.0 * state.gamma_hat * std::conj(path.nu_hat);
  LogLinearCircularDensity dens;
  dens.coeffs.resize(static_cast<std::size_t>(geom_.n_total));
  for (int i = 0; i < geom_.n_total; ++i) {
    const cplx r = state.residual[i] + path.nu_hat * old[i] * others[i];
    dens.coeffs[i] = scale * std::conj(others[i]) * r;
  }
  dens.exponents = model_.factors[f].exponents;
  VonMisesParams vm;
  try {
    vm = fit_von_mises(dens);
  } catch (const AllZeroCoefficients&) {
    ++state.skipped_updates;
    return UpdateStatus::Skipped;
  }
  CVec fresh;
  expected_steering_into(vm, model_.factors[f].exponents, fresh);
  state.residual.array() += path.nu_hat * (old - fresh).array() * others.array();
  path.freq[f] = vm;
  path.cache[f] = std::move(fresh);
  check_audit(state, "update_frequency");
  return UpdateStatus::Applied;
}

UpdateStatus SgvbEstimator::update_s(EstimatorState& state, int l) const {
  PathVariational& path = state.paths.at(static_cast<std::size_t>(l));
  if (path.nu_hat == cplx{}) {
    ++state.skipped_updates;
    return UpdateStatus::Skipped;
  }
  const std::size_t c = model_.frequency_count();
  const CVec others = others_product(path, c);
  const CVec& old = path.cache[c];
  const cplx scale = 2.0 * state.gamma_hat * std::conj(path.nu_hat);
  CVec zeta(geom_.n_total);
  for (int i = 0; i < geom_.n_total; ++i) {
    const cplx r = state.residual[i] + path.nu_hat * old[i] * others[i];
    zeta[i] = scale * std::conj(others[i]) * r;
  }
  const double s = grid_search_s(zeta, model_.curvature(), search_, path.s_hat);
  CVec fresh;
  model_.curvature().evaluate_into(s, fresh);
  state.residual.array() += path.nu_hat * (old - fresh).array() * others.array();
  path.s_hat = s;
  path.cache[c] = std::move(fresh);
  check_audit(state, "update_s");
  return UpdateStatus::Applied;
}

void SgvbEstimator::update_gain(EstimatorState& state, int l) const {
  PathVariational& path = state.paths.at(static_cast<std::size_t>(l));
  const double n = geom_.n_total;
  const CVec x = path_product(path);
  const double nx2 = x.squaredNorm();
  const cplx z = (path.nu_hat * nx2 + x.dot(state.residual)) / n;
  const double ng = n * state.gamma_hat;
  path.tau_nu = 1.0 / (ng + path.beta_hat);
  const cplx nu_new = z * ng * path.tau_nu;
  state.residual += (path.nu_hat - nu_new) * x;
  path.nu_hat = nu_new;
  check_audit(state, "update_gain");
}

void SgvbEstimator::update_beta(EstimatorState& state, int l) const {
  PathVariational& path = state.paths.at(static_cast<std::size_t>(l));
  path.beta_hat = (cfg_.a_beta + 1.0) / (cfg_.b_beta + std::norm(path.nu_hat) + path.tau_nu);
}

double SgvbEstimator::expected_residual_energy(const EstimatorState& state) const {
  const double n = geom_.n_total;
  double e = state.residual.squaredNorm();
  for (const PathVariational& path : state.paths) {
    const double nx2 = path_product(path).squaredNorm();
    e += path.tau_nu * nx2 + (std::norm(path.nu_hat) + path.tau_nu) * std::max(n - nx2, 0.0);
  }
  return e;
}

void SgvbEstimator::update_gamma(EstimatorState& state) const {
  const double n = geom_.n_total;
  const double g = (cfg_.a_gamma + n) / (cfg_.b_gamma + expected_residual_energy(state));
  state.gamma_hat = std::isfinite(g) ? std::clamp(g, kGammaMin, kGammaMax) : kGammaMax;
}

CVec SgvbEstimator::residual_from_scratch(const EstimatorState& state) const {
  CVec r = state.y;
  for (const PathVariational& path : state.paths) r -= path.nu_hat * path_product(path);
  return r;
}

void SgvbEstimator::refresh_residual(EstimatorState& state) const {
  state.residual = residual_from_scratch(state);
}

double SgvbEstimator::residual_mismatch(const EstimatorState& state) const {
  const double scale = std::max(state.y.norm(), 1e-300);
  return (state.residual - residual_from_scratch(state)).norm() / scale;
}

void SgvbEstimator::check_audit(const EstimatorState& state, const char* where) const {
  if (!cfg_.audit) return;
  const double mismatch = residual_mismatch(state);
  if (!(mismatch <= 1e-9)) {
    throw std::logic_error(std::string("residual audit failed after ") + where + ": " +
                           std::to_string(mismatch));
  }
}

void SgvbEstimator::record(EstimatorState& state) const {
  if (!cfg_.record_trajectory) return;
  IterationRecord rec;
  rec.iter = state.iter;
  rec.residual_norm = state.residual.norm();
  rec.gamma_hat = state.gamma_hat;
  for (const PathVariational& path : state.paths) {
    rec.omega.push_back(path.freq[0].mu);
    if (path.freq.size() > 1) rec.psi.push_back(path.freq[1].mu);
    rec.s.push_back(path.s_hat);
    rec.gain_power.push_back(std::norm(path.nu_hat));
  }
  state.trajectory.push_back(std::move(rec));
}

void SgvbEstimator::sweep(EstimatorState& state) const {
  const int paths = static_cast<int>(state.paths.size());
  for (int l = 0; l < paths; ++l) {
    update_frequency(state, l, FrequencyFactor::Omega);
    if (model_.frequency_count() > 1) update_frequency(state, l, FrequencyFactor::Psi);
    update_s(state, l);
    update_gain(state, l);
  }
  for (int l = 0; l < paths; ++l) update_beta(state, l);
  refresh_residual(state);
  update_gamma(state);
  ++state.iter;
  state.history.push_back(state.residual.norm());
  record(state);
}

SgvbResult SgvbEstimator::run(const CVec& y) const {
  EstimatorState state = initialize(y);
  // Nothing to explain: keep the initial state with zero gains and the precision ceiling.
  if (y.squaredNorm() == 0.0) return finish(std::move(state), 0, true);
  bool converged = false;
  int iters = 0;
  for (int it = 0; it < cfg_.max_iters; ++it) {
    const double prev = state.residual.norm();
    sweep(state);
    ++iters;
    const double cur = state.residual.norm();
    if (std::abs(cur - prev) <= cfg_.conv_tol * std::max(prev, 1e-300)) {
      converged = true;
      if (cfg_.stop_on_convergence) break;
    }
  }
  return finish(std::move(state), iters, converged);
}

bool SgvbEstimator::path_active(const EstimatorState& state, int l) const {
  double max_power = 0.0;
  for (const PathVariational& p : state.paths) max_power = std::max(max_power, std::norm(p.nu_hat));
  const double power = std::norm(state.paths.at(static_cast<std::size_t>(l)).nu_hat);
  if (!(max_power > 0.0)) return false;
  return power >= cfg_.prune_tol * max_power &&
         geom_.n_total * power * state.gamma_hat >= cfg_.detect_threshold;
}

SgvbResult SgvbEstimator::finish(EstimatorState state, int iterations, bool converged) const {
  SgvbResult res;
  res.h_hat = CVec::Zero(geom_.n_total);
  for (std::size_t l = 0; l < state.paths.size(); ++l) {
    const PathVariational& path = state.paths[l];
    res.h_hat += path.nu_hat * path_product(path);
    PathEstimate est;
    est.params.omega = path.freq[0].mu;
    if (path.freq.size() > 1) est.params.psi = path.freq[1].mu;
    est.params.s = path.s_hat;
    est.params.gain = path.nu_hat;
    est.location = from_path_params_clamped(geom_, est.params);
    est.alpha = physical_gain(geom_, est.params);
    est.tau_nu = path.tau_nu;
    est.active = path_active(state, static_cast<int>(l));
    res.paths.push_back(est);
  }
  res.iterations = iterations;
  res.converged = converged;
  res.state = std::move(state);
  return res;
}

SgvbResult run_sgvb(const CVec& y, const ArrayGeometry& geom, const SgvbConfig& config) {
  return SgvbEstimator(geom, config).run(y);
}

}  // namespace nfsgvb
