#include "mtnls/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "mtnls/errors.hpp"

namespace mtnls {

std::optional<std::string> ModelParams::validate() const {
  if (!(beta > 0.0)) throw ConfigError("params: beta must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("params: gamma must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("params: delta must be in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("params: alpha must be in (0,1]");
  if (!(C > 0.0 && C1 > 0.0 && C2 > 0.0))
    throw ConfigError("params: C, C1, C2 must be > 0");
  if (!(gamma > 2.0 * beta))
    throw ConfigError("params: gamma must exceed 2*beta (series constant diverges)");
  if (gamma <= 4.0 * beta)
    return "warning: gamma <= 4*beta; the main-theorem hypothesis gamma > 4*beta fails";
  return std::nullopt;
}

void guard_exp_amplitude(const GridField& g, double lam) {
  const double m = linf_norm(g);
  if (!(lam * m * m < 700.0))
    throw OverflowError("exponential amplitude overflow: lam*max|u|^2 = " +
                            std::to_string(lam * m * m) + " (max|u| = " +
                            std::to_string(m) + ")",
                        m);
}

double mass(const SpectralField& u) {
  double acc = 0.0;
  for (const auto& c : u.coeff) acc += std::norm(c);
  return 0.5 * acc;
}

double energy(const SpectralField& u, const ModelParams& params,
              const SeriesPolicy&) {
  const double kin = homogeneous_seminorm(u, 1.0);
  GridField g = u.basis->to_grid(u);
  guard_exp_amplitude(g, params.beta);
  const double w = g.basis->quad_weight();
  double pot = 0.0;
  for (const auto& v : g.values) {
    const double a = params.beta * std::norm(v);
    pot += std::expm1(a) - a;
  }
  return 0.5 * kin * kin + pot * w / (2.0 * params.beta);
}

double energy_series(const SpectralField& u, const ModelParams& params,
                     const SeriesPolicy& policy) {
  const double kin = homogeneous_seminorm(u, 1.0);
  GridField g = u.basis->to_grid(u);
  guard_exp_amplitude(g, params.beta);
  const double w = g.basis->quad_weight();
  const std::size_t ngrid = g.values.size();
  std::vector<double> sq(ngrid), pw(ngrid);
  for (std::size_t i = 0; i < ngrid; ++i) {
    sq[i] = std::norm(g.values[i]);
    pw[i] = sq[i];
  }
  // (1/2beta) sum_{p>=1} beta^{p+1}/(p+1)! |u|_{L^{2p+2}}^{2p+2}
  double pot = 0.0;
  double coef = params.beta;  // beta^{p+1}/(p+1)! at p = 1 is beta^2/2; start below
  for (int p = 1; p <= policy.p_max; ++p) {
    coef *= params.beta / static_cast<double>(p + 1);
    double lnorm = 0.0;
    for (std::size_t i = 0; i < ngrid; ++i) {
      pw[i] *= sq[i];
      lnorm += pw[i];
    }
    const double term = coef * lnorm * w;
    pot += term;
    if (term <= policy.tail_tol * std::max(pot, 1e-300)) break;
  }
  return 0.5 * kin * kin + pot / (2.0 * params.beta);
}

HValue h_functional(const SpectralField& u, double gamma, const SeriesPolicy& policy,
                    bool homogeneous) {
  GridField g = u.basis->to_grid(u);
  guard_exp_amplitude(g, gamma);
  std::vector<Complex> pw = g.values;  // u^{p+1} on the grid
  GridField gp(u.basis);
  double sum = 0.0, coef = 1.0, last = 0.0, prev = 0.0;
  for (int p = 0; p <= policy.p_max; ++p) {
    if (p > 0) {
      coef *= gamma / static_cast<double>(p);
      for (std::size_t i = 0; i < pw.size(); ++i) pw[i] *= g.values[i];
    }
    gp.values = pw;
    SpectralField up = u.basis->to_spectral(gp);
    const double nrm =
        homogeneous ? homogeneous_seminorm(up, 1.0) : sobolev_norm(up, 1.0);
    prev = last;
    last = coef * nrm * nrm;
    sum += last;
    if (p > 0 && last <= policy.tail_tol * std::max(sum, 1e-300)) {
      prev = 0.0;  // tail already negligible
      break;
    }
  }
  double tail = 0.0;
  if (last > 0.0 && prev > 0.0) {
    const double r = last / prev;
    if (r >= 1.0)
      throw NumericalError(
          "h_functional: series tail not converging at p_max (term ratio " +
          std::to_string(r) + ")");
    tail = last * r / (1.0 - r);
  }
  return {sum, tail};
}

double exp_h1_seminorm(const SpectralField& u, double beta_plus) {
  GridField g = u.basis->to_grid(u);
  guard_exp_amplitude(g, beta_plus);
  auto grad = u.basis->gradient(u);
  const double w = g.basis->quad_weight();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const Complex v = g.values[i];
    const double pref = 2.0 * beta_plus * std::exp(beta_plus * std::norm(v));
    const double gx = v.real() * grad[0].values[i].real() +
                      v.imag() * grad[0].values[i].imag();  // Re(conj(u) du/dx1)
    const double gy = v.real() * grad[1].values[i].real() +
                      v.imag() * grad[1].values[i].imag();
    acc += pref * pref * (gx * gx + gy * gy);
  }
  return std::sqrt(w * acc);
}

SeriesConstant series_constant(double beta, double gamma) {
  if (!(beta > 0.0 && gamma > 0.0))
    throw ConfigError("series_constant: beta, gamma must be > 0");
  SeriesConstant out;
  out.converges = gamma > 2.0 * beta;
  if (!out.converges) return out;
  const double ratio_limit = 2.0 * beta / gamma;
  double sum = 0.0;
  const double lq = std::log(beta / gamma);
  for (int k = 1; k <= 4000; ++k) {
    // term_k = (beta/gamma)^k sqrt((2k-1)!)/k!, in log space
    const double lt = k * lq + 0.5 * std::lgamma(2.0 * k) - std::lgamma(k + 1.0);
    const double term = std::exp(lt);
    sum += term;
    // subsequent ratios are below the limit 2 beta/gamma
    const double tail_bound = term * ratio_limit / (1.0 - ratio_limit);
    if (tail_bound < 1e-10 * std::max(sum, 1e-300)) break;
  }
  out.value = sum;
  return out;
}

double legendre_f(double lam, double x) {
  if (x < 0.0) throw UsageError("legendre_f: x must be >= 0");
  return x * std::exp(lam * x * x);
}

double legendre_f_inv(double lam, double y) {
  if (y < 0.0) throw UsageError("legendre_f_inv: y must be >= 0");
  if (lam <= 0.0) throw UsageError("legendre_f_inv: lam must be > 0");
  if (y == 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (legendre_f(lam, hi) < y) {
    hi *= 2.0;
    if (hi > 1e6) throw NumericalError("legendre_f_inv: bracketing failed");
  }
  double x = std::min(hi, std::max(lo, y / (1.0 + lam * y * y)));
  for (int it = 0; it < 200; ++it) {
    const double ex = std::exp(lam * x * x);
    const double fx = x * ex - y;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    const double dfx = ex * (1.0 + 2.0 * lam * x * x);
    double xn = x - fx / dfx;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection safeguard
    if (std::abs(xn - x) <= 1e-15 * (1.0 + std::abs(xn))) return xn;
    x = xn;
  }
  throw NumericalError("legendre_f_inv: Newton did not converge");
}

double legendre_phi(double lam, double y) { return y * legendre_f_inv(lam, y); }

double legendre_phi_star(double lam, double c, double y) {
  if (c <= 0.0) throw UsageError("legendre_phi_star: c must be > 0");
  if (y < 0.0) throw UsageError("legendre_phi_star: y must be >= 0");
  if (y == 0.0) return 0.0;
  // Maximize x*y - c*Phi(x). Parametrize x = t e^{lam t^2}; then
  // Phi(x) = t^2 e^{lam t^2} and dPhi/dx = t (2 + 2 lam t^2)/(1 + 2 lam t^2),
  // which is strictly increasing in t. The stationarity condition
  // dPhi/dx = y/c brackets t* in [y/(2c), y/c].
  const double target = y / c;
  auto dphi = [lam](double t) {
    const double s = 2.0 * lam * t * t;
    return t * (2.0 + s) / (1.0 + s);
  };
  double lo = 0.5 * target, hi = target;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dphi(mid) < target ? lo : hi) = mid;
    if (hi - lo <= 1e-16 * (1.0 + hi)) break;
  }
  const double t = 0.5 * (lo + hi);
  // x(t)*y - c*Phi(t) = t e^{lam t^2} (y - c t)
  return std::max(0.0, t * std::exp(lam * t * t) * (y - c * t));
}

double theta_interpolation(double eps, double delta) {
  if (!(eps > 0.0 && eps < delta && delta < 1.0))
    throw ConfigError("theta_interpolation: require 0 < eps < delta < 1");
  const double theta = eps * (4.0 + 2.0 * delta) / (delta * (4.0 + 2.0 * eps));
  if (!(theta > 0.0 && theta < 1.0))
    throw NumericalError("theta_interpolation: theta out of (0,1)");
  return theta;
}

}  // namespace mtnls
