// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/rng.hpp"

#include <cmath>

namespace nfsgvb {

double wrap_angle(double x) {
  double w = std::fmod(x + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  if (w >= kPi) w -= kTwoPi;
  return w;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a,
                          std::uint64_t b) {
  // FNV-1a over the tag, then chained mixing.
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  std::uint64_t k = splitmix64(seed ^ splitmix64(h));
  k = splitmix64(k ^ splitmix64(a + 0x1234567ull));
  k = splitmix64(k ^ splitmix64(b + 0x89ABCDEFull));
  return k;
}

double Rng::uniform(double lo, double hi) {
  // 53 random bits so results do not depend on the standard library's
  // distribution implementation.
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::normal() {
  // Box-Muller, one output per call.
  double u1 = uniform(0.0, 1.0);
  while (u1 <= 0.0) u1 = uniform(0.0, 1.0);
  const double u2 = uniform(0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

cplx Rng::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

}  // namespace nfsgvb
