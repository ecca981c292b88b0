// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "nfsgvb/types.hpp"

namespace nfsgvb {

std::uint64_t splitmix64(std::uint64_t x);

// Stream key from a seed, a purpose tag and two integer salts. Distinct
// (tag, a, b) give unrelated streams for the same seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  double normal();
  // Circularly-symmetric complex normal with E|z|^2 = variance.
  cplx complex_normal(double variance = 1.0);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nfsgvb
