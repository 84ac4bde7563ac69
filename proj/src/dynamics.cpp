#include "mtnls/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "mtnls/errors.hpp"

namespace mtnls {

NoiseSpec NoiseSpec::power_law(const SpectralBasis& basis, double r, double a0,
                               double scale) {
  if (!(a0 >= 0.0) || !(scale >= 0.0))
    throw ConfigError("noise: a0 and scale must be >= 0");
  NoiseSpec out;
  out.a.resize(basis.mode_count());
  for (std::size_t n = 0; n < out.a.size(); ++n)
    out.a[n] = scale * a0 * std::pow(1.0 + basis.lambda(n), -r);
  return out;
}

NoiseSpec NoiseSpec::scaled(double lam) const {
  if (!(lam > 0.0)) throw ConfigError("noise: scale must be > 0");
  NoiseSpec out;
  out.a.resize(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out.a[n] = lam * a[n];
  return out;
}

double NoiseSpec::A0() const {
  double s = 0.0;
  for (double an : a) s += an * an;
  return s;
}

double NoiseSpec::Ahalf(const SpectralBasis& basis) const {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n)
    s += std::sqrt(basis.lambda(n)) * a[n] * a[n];
  return s;
}

double NoiseSpec::A1(const SpectralBasis& basis) const {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += basis.lambda(n) * a[n] * a[n];
  return s;
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "strang-split") return Scheme::StrangSplit;
  if (s == "exp-euler-maruyama") return Scheme::ExpEulerMaruyama;
  throw ConfigError("unknown scheme: " + s);
}

std::string to_string(Scheme s) {
  return s == Scheme::StrangSplit ? "strang-split" : "exp-euler-maruyama";
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t x) {
  // (0,1), never exactly 0 or 1
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::pair<double, double> CounterRng::gaussian_pair(std::uint64_t step,
                                                    std::uint64_t mode) const {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ traj);
  h = mix64(h ^ step);
  h = mix64(h ^ mode);
  const double u1 = to_unit(mix64(h ^ 0x1ULL));
  const double u2 = to_unit(mix64(h ^ 0x2ULL));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

SpectralField deterministic_step(const SpectralField& u, double h,
                                 const ModelParams& params) {
  SpectralField w = u;
  const auto& basis = *u.basis;
  for (std::size_t n = 0; n < w.coeff.size(); ++n)
    w.coeff[n] *= std::polar(1.0, -basis.lambda(n) * h / 2.0);
  GridField g = basis.to_grid(w);
  guard_exp_amplitude(g, params.beta);
  for (auto& v : g.values)
    v *= std::polar(1.0, -h * std::expm1(params.beta * std::norm(v)));
  w = basis.to_spectral(g);
  for (std::size_t n = 0; n < w.coeff.size(); ++n)
    w.coeff[n] *= std::polar(1.0, -basis.lambda(n) * h / 2.0);
  return w;
}

namespace {

SpectralField conjugate(const SpectralField& u) {
  SpectralField w = u;
  for (auto& c : w.coeff) c = std::conj(c);
  return w;
}

}  // namespace

SpectralField deterministic_evolve(const SpectralField& u0, double T,
                                   const StepperConfig& config,
                                   const ModelParams& params,
                                   const Observer& observer) {
  if (!(config.h > 0.0)) throw ConfigError("dynamics: h must be > 0");
  if (T == 0.0) {
    if (observer) observer(0.0, u0);
    return u0;
  }
  // conjugation reverses time: conj(u)(t) solves the flow with t -> -t
  const bool reversed = T < 0.0;
  SpectralField u = reversed ? conjugate(u0) : u0;
  const double span = std::abs(T);
  const long nsteps = std::lround(span / config.h);
  const double h = span / static_cast<double>(std::max(nsteps, 1L));

  auto emit = [&](double t, const SpectralField& w) {
    if (!observer) return;
    if (reversed)
      observer(-t, conjugate(w));
    else
      observer(t, w);
  };

  emit(0.0, u);
  for (long s = 0; s < nsteps; ++s) {
    const double t_next = static_cast<double>(s + 1) * h;
    try {
      u = deterministic_step(u, h, params);
    } catch (const OverflowError& e) {
      throw OverflowError("overflow at t = " +
                              std::to_string(reversed ? -t_next : t_next) + ": " +
                              e.what(),
                          e.offending_value);
    }
    if (config.stride > 0 && ((s + 1) % config.stride == 0 || s + 1 == nsteps))
      emit(t_next, u);
  }
  return reversed ? conjugate(u) : u;
}

SpectralField ou_convolution_step(const SpectralField& z, double h, double alpha,
                                  const NoiseSpec& noise, const CounterRng& rng,
                                  std::uint64_t step) {
  if (!(h > 0.0)) throw ConfigError("dynamics: h must be > 0");
  if (z.coeff.size() != noise.a.size())
    throw UsageError("ou_convolution_step: noise vector length mismatch");
  SpectralField w = z;
  const auto& basis = *z.basis;
  const double sd = std::sqrt(alpha * h / 2.0);  // per real component
  for (std::size_t n = 0; n < w.coeff.size(); ++n) {
    w.coeff[n] *= std::polar(1.0, (1.0 - basis.lambda(n)) * h);
    if (alpha > 0.0) {
      auto [g1, g2] = rng.gaussian_pair(step, n);
      w.coeff[n] += noise.a[n] * Complex{sd * g1, sd * g2};
    }
  }
  return w;
}

namespace {

void add_noise_increment(SpectralField& u, double h, double alpha,
                         const NoiseSpec& noise, const CounterRng& rng,
                         std::uint64_t step) {
  if (alpha <= 0.0) return;
  const double sd = std::sqrt(alpha * h / 2.0);
  for (std::size_t n = 0; n < u.coeff.size(); ++n) {
    auto [g1, g2] = rng.gaussian_pair(step, n);
    u.coeff[n] += noise.a[n] * Complex{sd * g1, sd * g2};
  }
}

}  // namespace

SpectralField fd_step(const SpectralField& u, double h, const ModelParams& params,
                      const NoiseSpec& noise, const CounterRng& rng,
                      std::uint64_t step) {
  if (u.coeff.size() != noise.a.size())
    throw UsageError("fd_step: noise vector length mismatch");
  const auto& basis = *u.basis;
  SpectralField drift = nonlinear_F(u, params.beta);
  DissipationResult L = dissipation_L(u, params);
  SpectralField v = u;
  for (std::size_t n = 0; n < v.coeff.size(); ++n) {
    const Complex d = Complex{0.0, -1.0} * drift.coeff[n] -
                      params.alpha * L.total.coeff[n];
    v.coeff[n] = (v.coeff[n] + h * d) * std::polar(1.0, -basis.lambda(n) * h);
  }
  add_noise_increment(v, h, params.alpha, noise, rng, step);
  if (!v.finite()) throw NumericalError("fd_step: non-finite state at step " +
                                        std::to_string(step));
  return v;
}

double fd_stiffness_estimate(const SpectralField& u, double h,
                             const ModelParams& params) {
  DissipationResult L = dissipation_L(u, params);
  double lnorm = 0.0, unorm = 0.0;
  for (std::size_t n = 0; n < u.coeff.size(); ++n) {
    lnorm += std::norm(L.total.coeff[n]);
    unorm += std::norm(u.coeff[n]);
  }
  return h * params.alpha * std::sqrt(lnorm) / std::max(std::sqrt(unorm), 1e-12);
}

SpectralField SplitState::combined() const { return v + z; }

SplitState fd_split_step(const SplitState& s, double h, const ModelParams& params,
                         const NoiseSpec& noise, const CounterRng& rng,
                         std::uint64_t step) {
  SpectralField u = s.combined();
  SpectralField drift = nonlinear_F(u, params.beta);
  DissipationResult L = dissipation_L(u, params);
  const auto& basis = *u.basis;
  SplitState out = s;
  // dv = i Delta v - iz - i F(u) - alpha L(u); the -iz term compensates the
  // +i shift in the z rotation
  for (std::size_t n = 0; n < out.v.coeff.size(); ++n) {
    const Complex d = Complex{0.0, -1.0} * (s.z.coeff[n] + drift.coeff[n]) -
                      params.alpha * L.total.coeff[n];
    out.v.coeff[n] =
        (out.v.coeff[n] + h * d) * std::polar(1.0, -basis.lambda(n) * h);
  }
  out.z = ou_convolution_step(s.z, h, params.alpha, noise, rng, step);
  return out;
}

std::vector<TwinSample> twin_evolve(const SpectralField& u0, const SpectralField& v0,
                                    double T, const StepperConfig& config,
                                    const ModelParams& params, double beta_plus) {
  if (u0.basis != v0.basis) throw UsageError("twin_evolve: basis mismatch");
  if (!(T > 0.0)) throw ConfigError("twin_evolve: T must be > 0");
  if (!(config.h > 0.0)) throw ConfigError("dynamics: h must be > 0");
  const long nsteps = std::lround(T / config.h);
  const double h = T / static_cast<double>(std::max(nsteps, 1L));

  SpectralField u = u0, v = v0;
  std::vector<TwinSample> out;
  auto sample = [&](double t) {
    TwinSample rec;
    rec.t = t;
    SpectralField d = u - v;
    rec.diff_l2 = sobolev_norm(d, 0.0);
    rec.diff_grad_l2 = homogeneous_seminorm(d, 1.0);
    rec.u_h1 = sobolev_norm(u, 1.0);
    rec.v_h1 = sobolev_norm(v, 1.0);
    rec.u_hdot1 = homogeneous_seminorm(u, 1.0);
    rec.v_hdot1 = homogeneous_seminorm(v, 1.0);
    rec.exp_h1_u = exp_h1_seminorm(u, beta_plus);
    rec.exp_h1_v = exp_h1_seminorm(v, beta_plus);
    out.push_back(rec);
  };

  sample(0.0);
  for (long s = 0; s < nsteps; ++s) {
    u = deterministic_step(u, h, params);
    v = deterministic_step(v, h, params);
    if (config.stride > 0 && ((s + 1) % config.stride == 0 || s + 1 == nsteps))
      sample(static_cast<double>(s + 1) * h);
  }
  return out;
}

}  // namespace mtnls
