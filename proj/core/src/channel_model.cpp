// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/channel_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nfsgvb/error.hpp"
#include "nfsgvb/rng.hpp"

namespace nfsgvb {

ArrayGeometry ArrayGeometry::ula(int n, double carrier_hz, double spacing_wavelengths) {
  ArrayGeometry g;
  g.kind = ArrayKind::Ula;
  g.n_total = n;
  g.n_h = n;
  g.n_v = 1;
  g.carrier_hz = carrier_hz;
  g.wavelength = kSpeedOfLight / carrier_hz;
  g.spacing = spacing_wavelengths * g.wavelength;
  g.validate();
  return g;
}

ArrayGeometry ArrayGeometry::upa(int n_h, int n_v, double carrier_hz, double spacing_wavelengths) {
  ArrayGeometry g;
  g.kind = ArrayKind::Upa;
  g.n_h = n_h;
  g.n_v = n_v;
  g.n_total = n_h * n_v;
  g.carrier_hz = carrier_hz;
  g.wavelength = kSpeedOfLight / carrier_hz;
  g.spacing = spacing_wavelengths * g.wavelength;
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (n_total < 1) throw InvalidConfig("array needs at least one element");
  if (!(spacing > 0.0)) throw InvalidConfig("element spacing must be positive");
  if (!(wavelength > 0.0)) throw InvalidConfig("wavelength must be positive");
  if (kind == ArrayKind::Upa && (n_h < 1 || n_v < 1 || n_h * n_v != n_total)) {
    throw InvalidConfig("UPA requires n_total = n_h * n_v");
  }
}

CVec SteeringFactor::evaluate(double x) const {
  CVec out;
  evaluate_into(x, out);
  return out;
}

void SteeringFactor::evaluate_into(double x, CVec& out) const {
  out.resize(static_cast<Eigen::Index>(exponents.size()));
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = std::polar(1.0, sign * exponents[i] * x);
  }
}

namespace {

int upa_m(const ArrayGeometry& geom, int i) { return i % geom.n_h; }
int upa_n(const ArrayGeometry& geom, int i) { return i / geom.n_h; }

double ula_offset(const ArrayGeometry& geom, int i) {
  return 0.5 * (2.0 * i - geom.n_total + 1.0) * geom.spacing;
}

void check_element(const ArrayGeometry& geom, int element) {
  if (element < 0 || element >= geom.n_total) throw std::out_of_range("element index");
}

}  // namespace

FactorModel factor_model(const ArrayGeometry& geom) {
  const int n = geom.n_total;
  FactorModel model;
  if (geom.kind == ArrayKind::Ula) {
    SteeringFactor a{{}, 1, FactorRole::Frequency};
    SteeringFactor c{{}, 1, FactorRole::Curvature};
    for (int i = 0; i < n; ++i) {
      a.exponents.push_back(i);
      c.exponents.push_back(i * (n - 1 - i));
    }
    model.factors = {std::move(a), std::move(c)};
  } else {
    SteeringFactor a{{}, 1, FactorRole::Frequency};
    SteeringFactor c{{}, 1, FactorRole::Frequency};
    SteeringFactor d{{}, -1, FactorRole::Curvature};
    for (int i = 0; i < n; ++i) {
      const int m = upa_m(geom, i);
      const int v = upa_n(geom, i);
      a.exponents.push_back(m);
      c.exponents.push_back(v);
      d.exponents.push_back(m * m + v * v);
    }
    model.factors = {std::move(a), std::move(c), std::move(d)};
  }
  return model;
}

std::vector<Eigen::Vector3d> element_positions(const ArrayGeometry& geom) {
  std::vector<Eigen::Vector3d> pos;
  pos.reserve(static_cast<std::size_t>(geom.n_total));
  for (int i = 0; i < geom.n_total; ++i) {
    if (geom.kind == ArrayKind::Ula) {
      pos.emplace_back(0.0, ula_offset(geom, i), 0.0);
    } else {
      pos.emplace_back(0.0, upa_m(geom, i) * geom.spacing, upa_n(geom, i) * geom.spacing);
    }
  }
  return pos;
}

Eigen::Vector3d scatterer_position(const ArrayGeometry& geom, const Scatterer& sc) {
  if (geom.kind == ArrayKind::Ula) {
    return {sc.r * std::cos(sc.theta), sc.r * std::sin(sc.theta), 0.0};
  }
  return {sc.r * std::cos(sc.theta) * std::cos(sc.phi), sc.r * std::cos(sc.theta) * std::sin(sc.phi),
          sc.r * std::sin(sc.theta)};
}

namespace {

Eigen::Vector3d element_position(const ArrayGeometry& geom, int i) {
  if (geom.kind == ArrayKind::Ula) return {0.0, ula_offset(geom, i), 0.0};
  return {0.0, upa_m(geom, i) * geom.spacing, upa_n(geom, i) * geom.spacing};
}

// r - d_i for element i, both modes, without cancellation.
double path_difference(const ArrayGeometry& geom, const Scatterer& sc, int i, ChannelMode mode) {
  if (mode == ChannelMode::Exact) {
    const Eigen::Vector3d p = scatterer_position(geom, sc);
    const Eigen::Vector3d u = element_position(geom, i);
    const double d = (p - u).norm();
    return (2.0 * p.dot(u) - u.squaredNorm()) / (sc.r + d);
  }
  if (geom.kind == ArrayKind::Ula) {
    const double delta = ula_offset(geom, i);
    return delta * std::sin(sc.theta) - delta * delta / (2.0 * sc.r);
  }
  const double m = upa_m(geom, i);
  const double n = upa_n(geom, i);
  const double dl = geom.spacing;
  return dl * (m * std::cos(sc.theta) * std::sin(sc.phi) + n * std::sin(sc.theta)) -
         dl * dl * (m * m + n * n) / (2.0 * sc.r);
}

}  // namespace

double exact_distance(const ArrayGeometry& geom, const Scatterer& sc, int element) {
  check_element(geom, element);
  return (scatterer_position(geom, sc) - element_position(geom, element)).norm();
}

double fresnel_distance(const ArrayGeometry& geom, const Scatterer& sc, int element) {
  check_element(geom, element);
  return sc.r - path_difference(geom, sc, element, ChannelMode::Fresnel);
}

double ula_gain_rotation(const ArrayGeometry& geom, double omega, double s) {
  const double c = 0.5 * (geom.n_total - 1);
  return -c * (omega + c * s);
}

PathParams to_path_params(const ArrayGeometry& geom, const Scatterer& sc) {
  if (!(sc.r > 0.0)) throw std::invalid_argument("scatterer distance must be positive");
  PathParams p;
  const double kd = geom.k_spacing();
  p.s = geom.curvature_scale() / sc.r;
  if (geom.kind == ArrayKind::Ula) {
    p.omega = kd * std::sin(sc.theta);
    p.gain = sc.alpha * std::polar(1.0, ula_gain_rotation(geom, p.omega, p.s));
  } else {
    p.omega = kd * std::cos(sc.theta) * std::sin(sc.phi);
    p.psi = kd * std::sin(sc.theta);
    p.gain = sc.alpha;
  }
  return p;
}

namespace {

PolarLocation invert(const ArrayGeometry& geom, const PathParams& params, bool clamp) {
  const double kd = geom.k_spacing();
  auto checked_asin = [&](double v, const char* what) {
    if (!std::isfinite(v)) throw OutOfPrincipalRange(std::string(what) + " is not finite");
    if (std::abs(v) > 1.0) {
      if (!clamp) throw OutOfPrincipalRange(std::string(what) + " outside the visible region");
      v = v > 0.0 ? 1.0 : -1.0;
    }
    return std::asin(v);
  };
  PolarLocation loc;
  if (geom.kind == ArrayKind::Ula) {
    loc.theta = checked_asin(params.omega / kd, "omega");
  } else {
    loc.theta = checked_asin(params.psi / kd, "psi");
    const double ct = std::cos(loc.theta);
    const double arg = ct > 0.0 ? params.omega / (kd * ct) : 0.0;
    loc.phi = checked_asin(arg, "omega");
  }
  loc.r = params.s > 0.0 ? geom.curvature_scale() / params.s
                         : std::numeric_limits<double>::infinity();
  return loc;
}

}  // namespace

PolarLocation from_path_params(const ArrayGeometry& geom, const PathParams& params) {
  return invert(geom, params, false);
}

PolarLocation from_path_params_clamped(const ArrayGeometry& geom, const PathParams& params) {
  return invert(geom, params, true);
}

cplx physical_gain(const ArrayGeometry& geom, const PathParams& params) {
  if (geom.kind == ArrayKind::Upa) return params.gain;
  return params.gain * std::polar(1.0, -ula_gain_rotation(geom, params.omega, params.s));
}

CVec steering_reparam(const ArrayGeometry& geom, const PathParams& params) {
  const FactorModel model = factor_model(geom);
  CVec out = model.factors[0].evaluate(params.omega);
  if (geom.kind == ArrayKind::Upa) out.array() *= model.factors[1].evaluate(params.psi).array();
  out.array() *= model.curvature().evaluate(params.s).array();
  return out;
}

CVec steering_vector(const ArrayGeometry& geom, const Scatterer& sc, ChannelMode mode) {
  const double k = geom.wavenumber();
  CVec b(geom.n_total);
  for (int i = 0; i < geom.n_total; ++i) {
    b[i] = std::polar(1.0, k * path_difference(geom, sc, i, mode));
  }
  return b;
}

CVec synthesize_channel(const ArrayGeometry& geom, const Scene& scene, ChannelMode mode) {
  CVec h = CVec::Zero(geom.n_total);
  for (const Scatterer& sc : scene.scatterers) h += sc.alpha * steering_vector(geom, sc, mode);
  return h;
}

double rayleigh_distance(const ArrayGeometry& geom) {
  double aperture = 0.0;
  if (geom.kind == ArrayKind::Ula) {
    aperture = geom.n_total * geom.spacing;
  } else {
    aperture = geom.spacing * std::hypot(static_cast<double>(geom.n_h), static_cast<double>(geom.n_v));
  }
  return 2.0 * aperture * aperture / geom.wavelength;
}

void SceneConfig::validate() const {
  if (l_paths < 1) throw InvalidConfig("scene needs at least one path");
  if (!(r_min > 0.0)) throw InvalidConfig("r_min must be positive");
  if (!(r_min <= r_max)) throw InvalidConfig("r_min must not exceed r_max");
  if (fixed_distance && !(*fixed_distance > 0.0)) throw InvalidConfig("fixed distance must be positive");
  for (const auto* range : {&theta_range_deg, &phi_range_deg}) {
    if (!((*range)[0] <= (*range)[1]) || (*range)[0] <= -90.0 || (*range)[1] >= 90.0) {
      throw InvalidConfig("angle ranges must satisfy -90 < lo <= hi < 90 degrees");
    }
  }
  if (min_angle_sep_deg < 0.0) throw InvalidConfig("min_angle_sep_deg must be >= 0");
}

Scene generate_scene(const ArrayGeometry& geom, const SceneConfig& config, std::uint64_t rng_seed) {
  config.validate();
  Rng rng(derive_seed(rng_seed, "scene"));
  Scene scene;
  const bool upa = geom.kind == ArrayKind::Upa;
  constexpr int kMaxDraws = 10000;
  int draws = 0;
  while (static_cast<int>(scene.scatterers.size()) < config.l_paths) {
    if (++draws > kMaxDraws) {
      throw InvalidConfig("cannot place paths with the requested min_angle_sep_deg");
    }
    Scatterer sc;
    sc.r = config.fixed_distance ? *config.fixed_distance : rng.uniform(config.r_min, config.r_max);
    sc.theta = deg2rad(rng.uniform(config.theta_range_deg[0], config.theta_range_deg[1]));
    sc.phi = upa ? deg2rad(rng.uniform(config.phi_range_deg[0], config.phi_range_deg[1])) : 0.0;
    sc.alpha = rng.complex_normal(1.0);
    if (config.min_angle_sep_deg > 0.0) {
      const double sep = deg2rad(config.min_angle_sep_deg);
      bool ok = true;
      for (const Scatterer& o : scene.scatterers) {
        const double gap = std::max(std::abs(o.theta - sc.theta), upa ? std::abs(o.phi - sc.phi) : 0.0);
        if (gap < sep) ok = false;
      }
      if (!ok) continue;
    }
    scene.scatterers.push_back(sc);
  }
  return scene;
}

NoisyObservation add_noise(const CVec& h, double snr_linear, int l_paths, std::uint64_t rng_seed) {
  if (!(snr_linear > 0.0)) throw InvalidConfig("snr must be positive");
  if (l_paths < 1) throw InvalidConfig("l_paths must be >= 1");
  NoisyObservation obs;
  obs.n0 = std::isinf(snr_linear) ? 0.0 : static_cast<double>(l_paths) / snr_linear;
  obs.y = h;
  if (obs.n0 > 0.0) {
    Rng rng(derive_seed(rng_seed, "noise"));
    for (Eigen::Index i = 0; i < obs.y.size(); ++i) obs.y[i] += rng.complex_normal(obs.n0);
  }
  return obs;
}

}  // namespace nfsgvb
