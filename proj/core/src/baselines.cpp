// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>

#include "nfsgvb/error.hpp"

namespace nfsgvb {

CVec ls_estimate(const CVec& y) { return y; }

OracleLsResult oracle_ls_estimate(const CVec& y, const ArrayGeometry& geom, const Scene& true_scene,
                                  ChannelMode mode) {
  const Eigen::Index n = geom.n_total;
  const Eigen::Index l = static_cast<Eigen::Index>(true_scene.scatterers.size());
  if (y.size() != n) throw std::invalid_argument("oracle_ls_estimate: observation length mismatch");
  if (l > n) throw std::invalid_argument("oracle_ls_estimate: more paths than antennas");
  OracleLsResult out;
  if (l == 0) {
    out.h_hat = CVec::Zero(n);
    return out;
  }
  CMat b(n, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    b.col(i) = steering_vector(geom, true_scene.scatterers[static_cast<std::size_t>(i)], mode);
  }
  // Gram-matrix conditioning decides between the plain solve and a truncated pseudo-inverse.
  Eigen::JacobiSVD<CMat> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  const double smax = sv(0);
  const double cutoff = std::sqrt(1e-10) * smax;
  out.rank_deficient = sv(l - 1) <= cutoff;
  CVec proj = CVec::Zero(n);
  const CMat& u = svd.matrixU();
  for (Eigen::Index i = 0; i < l; ++i) {
    if (sv(i) > cutoff) proj += u.col(i) * u.col(i).dot(y);
  }
  out.h_hat = proj;
  return out;
}

double ring_coherence(const ArrayGeometry& geom, double delta) {
  const FactorModel model = factor_model(geom);
  const SteeringFactor& f = model.curvature();
  cplx acc{};
  for (int g : f.exponents) acc += std::polar(1.0, f.sign * g * delta);
  return std::abs(acc) / static_cast<double>(f.exponents.size());
}

double coherence_spacing(const ArrayGeometry& geom, double coherence) {
  if (!(coherence > 0.0 && coherence < 1.0)) throw InvalidConfig("coherence_param must be in (0, 1)");
  const FactorModel model = factor_model(geom);
  int gmax = 0;
  for (int g : model.curvature().exponents) gmax = std::max(gmax, g);
  if (gmax == 0) return std::numeric_limits<double>::infinity();
  const double step = 0.01 / gmax;
  double lo = 0.0;
  double hi = step;
  while (ring_coherence(geom, hi) >= coherence) {
    lo = hi;
    hi += step;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ring_coherence(geom, mid) >= coherence ? lo : hi) = mid;
  }
  return lo;
}

PolarCodebook build_polar_codebook(const ArrayGeometry& geom, double r_min, double r_max,
                                   int angular_size, double coherence_param) {
  geom.validate();
  if (angular_size < geom.n_total) throw InvalidConfig("codebook angular_size must be >= N");
  if (!(r_min > 0.0) || !(r_min <= r_max)) throw InvalidConfig("codebook distance range is empty");

  PolarCodebook cb;
  const double kd = geom.k_spacing();
  const double s_max = std::isinf(r_min) ? 0.0 : geom.curvature_scale() / r_min;
  const double delta = coherence_spacing(geom, coherence_param);
  int rings = 1;
  if (s_max > 0.0 && std::isfinite(delta)) rings = static_cast<int>(std::floor(s_max / delta)) + 1;
  cb.ring_spacing = rings > 1 ? s_max / (rings - 1) : 0.0;
  std::vector<double> ring_s(static_cast<std::size_t>(rings));
  for (int j = 0; j < rings; ++j) ring_s[j] = j * cb.ring_spacing;

  if (geom.kind == ArrayKind::Ula) {
    for (int p = 0; p < angular_size; ++p) {
      cb.angle_grid.push_back(-kd + 2.0 * kd * p / angular_size);
      cb.psi_grid.push_back(0.0);
    }
  } else {
    const double factor = std::sqrt(static_cast<double>(angular_size) / geom.n_total);
    const int n_w = std::max(1, static_cast<int>(std::lround(factor * geom.n_h)));
    const int n_p = std::max(1, static_cast<int>(std::lround(factor * geom.n_v)));
    for (int q = 0; q < n_p; ++q) {
      const double psi = -kd + 2.0 * kd * q / n_p;
      for (int p = 0; p < n_w; ++p) {
        const double w = -kd + 2.0 * kd * p / n_w;
        if ((w * w + psi * psi) / (kd * kd) > 1.0) continue;  // outside the visible region
        cb.angle_grid.push_back(w);
        cb.psi_grid.push_back(psi);
      }
    }
  }

  const std::size_t n_angles = cb.angle_grid.size();
  const Eigen::Index m = static_cast<Eigen::Index>(n_angles) * rings;
  cb.atoms.resize(geom.n_total, m);
  const FactorModel model = factor_model(geom);
  const double norm = 1.0 / std::sqrt(static_cast<double>(geom.n_total));
  std::vector<CVec> curv(static_cast<std::size_t>(rings));
  for (int j = 0; j < rings; ++j) curv[j] = model.curvature().evaluate(ring_s[j]);
  Eigen::Index col = 0;
  for (std::size_t a = 0; a < n_angles; ++a) {
    CVec base = model.factors[0].evaluate(cb.angle_grid[a]);
    if (geom.kind == ArrayKind::Upa) base.array() *= model.factors[1].evaluate(cb.psi_grid[a]).array();
    cb.s_grid_per_angle.push_back(ring_s);
    for (int j = 0; j < rings; ++j) {
      cb.atoms.col(col++) = norm * (base.array() * curv[j].array()).matrix();
      cb.lookup.push_back({cb.angle_grid[a], cb.psi_grid[a], ring_s[j]});
    }
  }
  return cb;
}

namespace {

constexpr char kMagic[8] = {'N', 'F', 'C', 'B', 'O', 'O', 'K', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

void save_codebook(const std::filesystem::path& file, const PolarCodebook& cb, const std::string& key) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write codebook cache " + file.string());
  os.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(os, key.size());
  os.write(key.data(), static_cast<std::streamsize>(key.size()));
  put<std::int64_t>(os, cb.atoms.rows());
  put<std::int64_t>(os, cb.atoms.cols());
  put<std::uint64_t>(os, cb.angle_grid.size());
  put(os, cb.ring_spacing);
  for (std::size_t a = 0; a < cb.angle_grid.size(); ++a) {
    put(os, cb.angle_grid[a]);
    put(os, cb.psi_grid[a]);
    put<std::uint64_t>(os, cb.s_grid_per_angle[a].size());
    for (double s : cb.s_grid_per_angle[a]) put(os, s);
  }
  for (const PolarAtom& at : cb.lookup) {
    put(os, at.omega);
    put(os, at.psi);
    put(os, at.s);
  }
  os.write(reinterpret_cast<const char*>(cb.atoms.data()),
           static_cast<std::streamsize>(sizeof(cplx) * cb.atoms.size()));
}

std::optional<PolarCodebook> load_codebook(const std::filesystem::path& file, const std::string& key) {
  std::ifstream is(file, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || !std::equal(magic, magic + 8, kMagic)) return std::nullopt;
  std::uint64_t klen = 0;
  if (!get(is, klen) || klen > 4096) return std::nullopt;
  std::string stored(klen, '\0');
  if (!is.read(stored.data(), static_cast<std::streamsize>(klen)) || stored != key) return std::nullopt;
  std::int64_t rows = 0, cols = 0;
  std::uint64_t n_angles = 0;
  PolarCodebook cb;
  if (!get(is, rows) || !get(is, cols) || !get(is, n_angles) || !get(is, cb.ring_spacing)) return std::nullopt;
  if (rows <= 0 || cols < 0 || rows > (1 << 20) || cols > (1 << 24)) return std::nullopt;
  for (std::uint64_t a = 0; a < n_angles; ++a) {
    double w = 0, p = 0;
    std::uint64_t nr = 0;
    if (!get(is, w) || !get(is, p) || !get(is, nr) || nr > (1u << 20)) return std::nullopt;
    std::vector<double> rings(nr);
    for (double& s : rings) {
      if (!get(is, s)) return std::nullopt;
    }
    cb.angle_grid.push_back(w);
    cb.psi_grid.push_back(p);
    cb.s_grid_per_angle.push_back(std::move(rings));
  }
  cb.lookup.resize(static_cast<std::size_t>(cols));
  for (PolarAtom& at : cb.lookup) {
    if (!get(is, at.omega) || !get(is, at.psi) || !get(is, at.s)) return std::nullopt;
  }
  cb.atoms.resize(rows, cols);
  if (!is.read(reinterpret_cast<char*>(cb.atoms.data()),
               static_cast<std::streamsize>(sizeof(cplx) * cb.atoms.size()))) {
    return std::nullopt;
  }
  return cb;
}

PursuitResult p_somp(const CVec& y, const PolarCodebook& codebook, int l_paths) {
  const CMat& a = codebook.atoms;
  if (y.size() != a.rows()) throw std::invalid_argument("p_somp: observation length mismatch");
  if (l_paths < 1 || l_paths > a.rows()) throw std::invalid_argument("p_somp: need 1 <= l_paths <= N");
  PursuitResult out;
  CVec r = y;
  std::vector<bool> used(static_cast<std::size_t>(a.cols()), false);
  const int steps = static_cast<int>(std::min<Eigen::Index>(l_paths, a.cols()));
  CMat sel(a.rows(), 0);
  for (int it = 0; it < steps; ++it) {
    const CVec corr = a.adjoint() * r;
    Eigen::Index best = -1;
    double best_val = -1.0;
    for (Eigen::Index m = 0; m < corr.size(); ++m) {
      if (used[static_cast<std::size_t>(m)]) continue;
      const double v = std::norm(corr[m]);
      if (v > best_val) {
        best_val = v;
        best = m;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.atoms.push_back(best);
    sel.conservativeResize(Eigen::NoChange, sel.cols() + 1);
    sel.col(sel.cols() - 1) = a.col(best);
    out.coefficients = sel.colPivHouseholderQr().solve(y);
    r = y - sel * out.coefficients;
    out.residual_norms.push_back(r.norm());
  }
  out.h_hat = y - r;
  return out;
}

void SblConfig::validate() const {
  if (max_em_iters < 1) throw InvalidConfig("sbl: max_em_iters must be >= 1");
  if (!(prune_tol >= 0.0 && prune_tol < 1.0)) throw InvalidConfig("sbl: prune_tol must be in [0, 1)");
  if (!(tol > 0.0)) throw InvalidConfig("sbl: tol must be positive");
  if (a_gamma < 0.0 || b_gamma < 0.0) throw InvalidConfig("sbl: priors must be >= 0");
  if (fixed_noise_precision && !(*fixed_noise_precision > 0.0)) {
    throw InvalidConfig("sbl: fixed noise precision must be positive");
  }
}

std::vector<Eigen::Index> SblResult::top_atoms(int count) const {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(weights.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return weights[a] > weights[b]; });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(count, 0))));
  return idx;
}

namespace {

struct EStep {
  CVec mu;
  RVec sigma_diag;
  CVec resid;
  double evidence = 0.0;
};

// Posterior of the active coefficients; the N x N or the M x M form, whichever is smaller.
EStep sbl_e_step(const CVec& y, const CMat& a, const RVec& var, double lam) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = a.cols();
  const double log_pi = std::log(kPi);
  EStep e;
  if (m >= n) {
    CMat c = (a * var.asDiagonal()) * a.adjoint();
    c.diagonal().array() += 1.0 / lam;
    Eigen::LLT<CMat> llt(c);
    if (llt.info() != Eigen::Success) {
      c.diagonal().array() += 1e-10 * c.diagonal().real().mean();
      llt.compute(c);
    }
    const CVec u = llt.solve(y);
    const CMat w = llt.matrixL().solve(a);
    e.mu = (var.array() * (a.adjoint() * u).array()).matrix();
    e.sigma_diag = var.array() - var.array().square() * w.colwise().squaredNorm().transpose().array();
    double logdet = 0.0;
    const CMat lmat = llt.matrixL();
    for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(lmat(i, i).real());
    e.evidence = -n * log_pi - logdet - y.dot(u).real();
  } else {
    CMat p = lam * (a.adjoint() * a);
    p.diagonal().array() += var.cwiseInverse().array();
    Eigen::LLT<CMat> llt(p);
    if (llt.info() != Eigen::Success) {
      p.diagonal().array() += 1e-10 * p.diagonal().real().mean();
      llt.compute(p);
    }
    const CMat sigma = llt.solve(CMat::Identity(m, m));
    e.mu = lam * (sigma * (a.adjoint() * y));
    e.sigma_diag = sigma.diagonal().real();
    double logdet_p = 0.0;
    const CMat lmat = llt.matrixL();
    for (Eigen::Index i = 0; i < m; ++i) logdet_p += 2.0 * std::log(lmat(i, i).real());
    const double logdet = -n * std::log(lam) + var.array().log().sum() + logdet_p;
    const CVec r = y - a * e.mu;
    const double quad = lam * r.squaredNorm() + (e.mu.array().abs2() / var.array()).sum();
    e.evidence = -n * log_pi - logdet - quad;
  }
  e.resid = y - a * e.mu;
  return e;
}

}  // namespace

SblResult sbl_estimate(const CVec& y, const PolarCodebook& codebook, const SblConfig& config) {
  config.validate();
  const CMat& a_full = codebook.atoms;
  const Eigen::Index n = a_full.rows();
  const Eigen::Index m_full = a_full.cols();
  if (y.size() != n) throw std::invalid_argument("sbl_estimate: observation length mismatch");

  SblResult out;
  out.mu = CVec::Zero(m_full);
  out.weights = RVec::Zero(m_full);
  out.variances = RVec::Zero(m_full);
  out.h_hat = CVec::Zero(n);
  const double y2 = y.squaredNorm();
  if (!(y2 > 0.0) || m_full == 0) {
    out.converged = true;
    return out;
  }

  const CVec corr = a_full.adjoint() * y;
  std::vector<Eigen::Index> active;
  std::vector<double> var_list;
  for (Eigen::Index m = 0; m < m_full; ++m) {
    active.push_back(m);
    var_list.push_back(std::max(std::norm(corr[m]), 1e-300));
  }
  double lam = config.fixed_noise_precision ? *config.fixed_noise_precision : 100.0 * n / y2;

  CVec mu_prev = CVec::Zero(m_full);
  EStep e;
  CMat a;
  RVec var;
  std::vector<Eigen::Index> e_active;
  for (int it = 0; it < config.max_em_iters; ++it) {
    a.resize(n, static_cast<Eigen::Index>(active.size()));
    var.resize(static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) {
      a.col(static_cast<Eigen::Index>(j)) = a_full.col(active[j]);
      var[static_cast<Eigen::Index>(j)] = var_list[j];
    }
    e = sbl_e_step(y, a, var, lam);
    e_active = active;
    ++out.iterations;
    if (config.record_evidence) out.evidence.push_back(e.evidence);

    CVec mu_full = CVec::Zero(m_full);
    for (std::size_t j = 0; j < active.size(); ++j) mu_full[active[j]] = e.mu[static_cast<Eigen::Index>(j)];
    const double change = (mu_full - mu_prev).norm() / std::max(mu_prev.norm(), 1e-300);
    mu_prev = mu_full;
    if (it > 0 && change < config.tol) {
      out.converged = true;
      break;
    }
    if (it + 1 == config.max_em_iters) break;

    // M-step on the prior variances and the noise precision.
    double trace_term = 0.0;
    for (Eigen::Index j = 0; j < var.size(); ++j) {
      trace_term += 1.0 - e.sigma_diag[j] / var[j];
      var_list[static_cast<std::size_t>(j)] = std::norm(e.mu[j]) + std::max(e.sigma_diag[j], 0.0);
    }
    if (!config.fixed_noise_precision) {
      lam = (n + config.a_gamma) / (config.b_gamma + e.resid.squaredNorm() + trace_term / lam);
    }
    const double vmax = *std::max_element(var_list.begin(), var_list.end());
    std::vector<Eigen::Index> keep_idx;
    std::vector<double> keep_var;
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (var_list[j] >= config.prune_tol * vmax && var_list[j] > 0.0) {
        keep_idx.push_back(active[j]);
        keep_var.push_back(var_list[j]);
      }
    }
    active.swap(keep_idx);
    var_list.swap(keep_var);
    if (active.empty()) break;
  }

  // Report the posterior of the last E-step against the atoms it used.
  for (std::size_t j = 0; j < e_active.size(); ++j) {
    const Eigen::Index m = e_active[j];
    const Eigen::Index jj = static_cast<Eigen::Index>(j);
    out.mu[m] = e.mu[jj];
    out.weights[m] = std::norm(e.mu[jj]);
    out.variances[m] = var[jj];
  }
  out.h_hat = y - e.resid;
  out.noise_precision = lam;
  return out;
}

}  // namespace nfsgvb
