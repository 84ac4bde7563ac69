#pragma once

#include <optional>
#include <string>

#include "mtnls/basis.hpp"

namespace mtnls {

struct ModelParams {
  double beta = 1.0;
  double gamma = 4.5;
  double delta = 0.5;
  double alpha = 0.5;
  double C = 128.0;
  double C1 = 256.0;
  double C2 = 1.0;

  // Throws ConfigError on hard violations (positivity, ranges, gamma <= 2*beta);
  // returns an advisory message when gamma <= 4*beta.
  std::optional<std::string> validate() const;
};

struct SeriesPolicy {
  int p_max = 64;
  double tail_tol = 1e-14;  // relative; evaluation stops early below it
};

// Overflow guard shared by all exponential-nonlinearity evaluations: requires
// lam * max|u|^2 < 700, else throws OverflowError naming max|u|.
void guard_exp_amplitude(const GridField& g, double lam);

double mass(const SpectralField& u);

// E(u) = 1/2 |grad u|^2 + (1/2beta) int (e^{beta|u|^2} - 1 - beta|u|^2),
// closed-form integrand on the quadrature grid.
double energy(const SpectralField& u, const ModelParams& params,
              const SeriesPolicy& policy);
// Series form of the potential part; agrees with the closed form within the
// policy tolerance on resolved fields.
double energy_series(const SpectralField& u, const ModelParams& params,
                     const SeriesPolicy& policy);

struct HValue {
  double value = 0.0;
  double tail = 0.0;  // truncation-tail estimate
};

// h(u) = sum_p gamma^p/p! |u^{p+1}|^2_{H^1} with the pointwise grid power
// re-projected for the norm. homogeneous=true uses the H^1 seminorm instead.
HValue h_functional(const SpectralField& u, double gamma, const SeriesPolicy& policy,
                    bool homogeneous = false);

// |grad(e^{beta_plus |u|^2} - 1)|_{L^2} via spectral gradients.
double exp_h1_seminorm(const SpectralField& u, double beta_plus);

struct SeriesConstant {
  double value = 0.0;
  bool converges = false;
};

// sum_{k>=1} (beta/gamma)^k sqrt((2k-1)!)/k!; converges iff gamma > 2 beta
// (term ratio tends to 2 beta / gamma).
SeriesConstant series_constant(double beta, double gamma);

// Legendre pair for the generalized Young inequality:
// f_lam(x) = x e^{lam x^2}, Phi^lam(y) = y f_lam^{-1}(y),
// Phi*_c(y) = sup_x (x y - c Phi^lam(x)).
double legendre_f(double lam, double x);
double legendre_f_inv(double lam, double y);
double legendre_phi(double lam, double y);
double legendre_phi_star(double lam, double c, double y);

// theta = eps (4 + 2 delta) / (delta (4 + 2 eps)), 0 < eps < delta < 1.
double theta_interpolation(double eps, double delta);

}  // namespace mtnls
