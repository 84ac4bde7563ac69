#pragma once

#include "mtnls/basis.hpp"
#include "mtnls/functionals.hpp"

namespace mtnls {

// F_lam(u) = P_N(e^{lam|u|^2} u)
SpectralField exp_drift(const SpectralField& u, double lam);

// P_N((e^{beta|u|^2} - 1) u)
SpectralField nonlinear_F(const SpectralField& u, double beta);

// P_N((-Delta)^{-1/2}(|(-Delta)^{1/2} u|^delta (-Delta)^{1/2} u))
SpectralField g_delta(const SpectralField& u, double delta);

struct DissipationBreakdown {
  SpectralField term1;     // C * prefactor * (u + F_beta(u))
  SpectralField term2;     // C2 * F_gamma(u)
  SpectralField term3;     // g_delta(u)
  double prefactor = 1.0;  // e^{gamma C1 |F_beta(u)|_{L2}^2}
};

struct DissipationResult {
  SpectralField total;
  DissipationBreakdown breakdown;
};

DissipationResult dissipation_L(const SpectralField& u, const ModelParams& params);

struct ModifiedEnergyReport {
  double V = 0.0;     // modified potential energy, from the series expansion
  double K = 0.0;     // modified kinetic energy <u, g_delta(u)>
  double Mtot = 0.0;  // V + K; equals <u, L(u)> (checked)
};

ModifiedEnergyReport mass_dissipation_rate(const SpectralField& u,
                                           const ModelParams& params,
                                           const SeriesPolicy& policy);

struct EnergyDissipation {
  double value = 0.0;      // unprojected grid nonlinearity paired with L(u)
  double projected = 0.0;  // fully projected pairing
  double gap() const { return value - projected; }
};

EnergyDissipation energy_dissipation_rate(const SpectralField& u,
                                          const ModelParams& params);

struct PairingCheck {
  double lhs = 0.0;  // <-Delta u, |u|^{2p} u>
  double rhs = 0.0;  // <|grad u|^2, |u|^{2p}>
  double alias_estimate = 0.0;
};

PairingCheck laplacian_pairing_inequality(const SpectralField& u, int p);

}  // namespace mtnls
