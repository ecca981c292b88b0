// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "nfsgvb/types.hpp"

namespace nfsgvb {

enum class ArrayKind { Ula, Upa };
enum class ChannelMode { Exact, Fresnel };

struct ArrayGeometry {
  ArrayKind kind = ArrayKind::Ula;
  int n_total = 0;
  int n_h = 0;  // UPA only
  int n_v = 0;  // UPA only
  double spacing = 0.0;     // meters
  double wavelength = 0.0;  // meters
  double carrier_hz = 0.0;

  static ArrayGeometry ula(int n, double carrier_hz, double spacing_wavelengths = 0.5);
  static ArrayGeometry upa(int n_h, int n_v, double carrier_hz, double spacing_wavelengths = 0.5);

  double wavenumber() const { return kTwoPi / wavelength; }
  // k * spacing, the bound on |omega| (and |psi|).
  double k_spacing() const { return wavenumber() * spacing; }
  // s = curvature_scale() / r
  double curvature_scale() const { return 0.5 * wavenumber() * spacing * spacing; }
  bool is_upa() const { return kind == ArrayKind::Upa; }
  void validate() const;
};

struct Scatterer {
  double r = 1.0;
  double theta = 0.0;
  double phi = 0.0;  // UPA only
  cplx alpha{1.0, 0.0};
};

struct Scene {
  std::vector<Scatterer> scatterers;
};

// gain holds nu for a ULA (phase-rotated alpha) and alpha for a UPA.
struct PathParams {
  double omega = 0.0;
  double psi = 0.0;  // UPA only
  double s = 0.0;
  cplx gain{1.0, 0.0};
};

struct PolarLocation {
  double theta = 0.0;
  double phi = 0.0;
  double r = 0.0;  // +inf when s == 0
};

enum class FactorRole { Frequency, Curvature };

struct SteeringFactor {
  std::vector<int> exponents;
  int sign = 1;
  FactorRole role = FactorRole::Frequency;

  // Entries e^{j sign g_i x}.
  CVec evaluate(double x) const;
  void evaluate_into(double x, CVec& out) const;
};

// Factor set of the re-parameterized model. ULA: [a(omega), c(s)].
// UPA: [a(omega), c(psi), d(s)]. The curvature factor is always last.
struct FactorModel {
  std::vector<SteeringFactor> factors;

  std::size_t frequency_count() const { return factors.size() - 1; }
  const SteeringFactor& curvature() const { return factors.back(); }
};

FactorModel factor_model(const ArrayGeometry& geom);

std::vector<Eigen::Vector3d> element_positions(const ArrayGeometry& geom);
Eigen::Vector3d scatterer_position(const ArrayGeometry& geom, const Scatterer& sc);

double exact_distance(const ArrayGeometry& geom, const Scatterer& sc, int element);
double fresnel_distance(const ArrayGeometry& geom, const Scatterer& sc, int element);

// Phase offset e^{j phase} that maps alpha to nu for a ULA.
double ula_gain_rotation(const ArrayGeometry& geom, double omega, double s);

PathParams to_path_params(const ArrayGeometry& geom, const Scatterer& sc);
// Throws OutOfPrincipalRange when the frequencies are unphysical.
PolarLocation from_path_params(const ArrayGeometry& geom, const PathParams& params);
// Same, with sin arguments clamped to [-1, 1].
PolarLocation from_path_params_clamped(const ArrayGeometry& geom, const PathParams& params);
// De-rotated complex gain alpha for reporting.
cplx physical_gain(const ArrayGeometry& geom, const PathParams& params);

// Unit-modulus product of the factors, without the gain.
CVec steering_reparam(const ArrayGeometry& geom, const PathParams& params);

// b(theta, phi, r) with entries e^{j k (r - d_i)}.
CVec steering_vector(const ArrayGeometry& geom, const Scatterer& sc, ChannelMode mode);
CVec synthesize_channel(const ArrayGeometry& geom, const Scene& scene, ChannelMode mode);

double rayleigh_distance(const ArrayGeometry& geom);

struct SceneConfig {
  int l_paths = 1;
  double r_min = 1.0;
  double r_max = 10.0;
  std::array<double, 2> theta_range_deg{-60.0, 60.0};
  std::array<double, 2> phi_range_deg{-80.0, 80.0};
  double min_angle_sep_deg = 0.0;
  std::optional<double> fixed_distance;

  void validate() const;
};

Scene generate_scene(const ArrayGeometry& geom, const SceneConfig& config, std::uint64_t rng_seed);

struct NoisyObservation {
  CVec y;
  double n0 = 0.0;
};

// n0 = l_paths / snr_linear; snr_linear = +inf gives a noiseless copy.
NoisyObservation add_noise(const CVec& h, double snr_linear, int l_paths, std::uint64_t rng_seed);

}  // namespace nfsgvb
