#pragma once

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace nle {

// c(d, sigma) such that a == 1/c gives the symbol -|xi|^sigma.
inline double frac_laplace_constant(int d, double sigma) {
  if (d < 1) throw DomainError("frac_laplace_constant: d must be >= 1");
  if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("frac_laplace_constant: sigma must lie in (0,2)");
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, 2.0 - sigma) / (sigma * (2.0 - sigma)) *
         std::tgamma(2.0 - 0.5 * sigma) / std::tgamma(0.5 * (d + sigma));
}

// c(d, sigma) * (2 - sigma), evaluated without the 1/(2-sigma) factor so it
// stays finite and bounded below as sigma -> 2.
inline double frac_laplace_constant_times_band(int d, double sigma) {
  if (d < 1) throw DomainError("frac_laplace_constant: d must be >= 1");
  if (!(sigma > 0.0 && sigma < 2.0)) throw DomainError("frac_laplace_constant: sigma must lie in (0,2)");
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, 2.0 - sigma) / sigma *
         std::tgamma(2.0 - 0.5 * sigma) / std::tgamma(0.5 * (d + sigma));
}

}  // namespace nle
