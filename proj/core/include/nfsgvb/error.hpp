// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nfsgvb {

class InvalidConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |omega| exceeds k*spacing, so no physical angle maps to it.
class OutOfPrincipalRange : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class AllZeroCoefficients : public std::invalid_argument {
 public:
  AllZeroCoefficients() : std::invalid_argument("log-linear density has all-zero coefficients") {}
};

class ZeroReference : public std::invalid_argument {
 public:
  ZeroReference() : std::invalid_argument("reference channel has zero energy") {}
};

class NoMatches : public std::invalid_argument {
 public:
  NoMatches() : std::invalid_argument("no matched path pairs") {}
};

}  // namespace nfsgvb
