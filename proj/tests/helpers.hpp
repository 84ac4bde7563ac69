#pragma once

#include <cmath>
#include <cstdint>

#include "mtnls/basis.hpp"
#include "mtnls/dynamics.hpp"

namespace mtnls::testing {

// deterministic pseudo-random field with power-law spectral decay
inline SpectralField random_field(const BasisPtr& basis, double amplitude,
                                  double decay, std::uint64_t seed) {
  SpectralField u(basis);
  CounterRng rng{seed, 0};
  const double c = 1.0 / std::sqrt(2.0);
  for (std::size_t n = 0; n < u.coeff.size(); ++n) {
    auto [g1, g2] = rng.gaussian_pair(0x5eedULL, n);
    const double sd = amplitude * std::pow(1.0 + basis->lambda(n), -decay);
    u.coeff[n] = sd * Complex{c * g1, c * g2};
  }
  return u;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / (1.0 + std::abs(want));
}

}  // namespace mtnls::testing
