#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mtnls/basis.hpp"
#include "mtnls/dissipation.hpp"
#include "mtnls/functionals.hpp"

namespace mtnls {

struct NoiseSpec {
  std::vector<double> a;  // per-mode coefficients, aligned to the mode table

  // a_n = scale * a0 * (1 + lambda_n)^{-r}
  static NoiseSpec power_law(const SpectralBasis& basis, double r = 1.5,
                             double a0 = 1.0, double scale = 1.0);

  NoiseSpec scaled(double lam) const;

  // A^s = sum_n lambda_n^s a_n^2, recomputed on demand
  double A0() const;
  double Ahalf(const SpectralBasis& basis) const;
  double A1(const SpectralBasis& basis) const;
};

enum class Scheme { StrangSplit, ExpEulerMaruyama };

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

struct StepperConfig {
  Scheme scheme = Scheme::ExpEulerMaruyama;
  double h = 1e-3;
  std::uint64_t seed = 1;
  int stride = 10;  // observer sampling interval, in steps
};

// Counter-based Gaussian stream: the pair for (trajectory, step, mode) is a
// pure function of the seed, so ensembles are reproducible in any order.
struct CounterRng {
  std::uint64_t seed = 1;
  std::uint64_t traj = 0;

  // independent N(0,1) pair
  std::pair<double, double> gaussian_pair(std::uint64_t step, std::uint64_t mode) const;
};

// one Strang step of i du/dt = -Delta u + (e^{beta|u|^2}-1)u
SpectralField deterministic_step(const SpectralField& u, double h,
                                 const ModelParams& params);

using Observer = std::function<void(double t, const SpectralField& u)>;

// Negative T runs the time-reversed flow via conjugation. On overflow the
// error message carries the in-run time reached.
SpectralField deterministic_evolve(const SpectralField& u0, double T,
                                   const StepperConfig& config,
                                   const ModelParams& params,
                                   const Observer& observer = nullptr);

// exact per-mode update of dz = i(Delta - 1)z dt + sqrt(alpha) dW
SpectralField ou_convolution_step(const SpectralField& z, double h, double alpha,
                                  const NoiseSpec& noise, const CounterRng& rng,
                                  std::uint64_t step);

// exponential Euler-Maruyama step of the damped/driven flow
SpectralField fd_step(const SpectralField& u, double h, const ModelParams& params,
                      const NoiseSpec& noise, const CounterRng& rng,
                      std::uint64_t step);

// h * alpha * |L(u)| / max(|u|, eps): explicit-step stiffness diagnostic
double fd_stiffness_estimate(const SpectralField& u, double h,
                             const ModelParams& params);

// Debug-mode split integration: z by the exact convolution step, v by
// exponential Euler on the remainder (including the -iz cross term from the
// +i shift in the z rotation). v+z agrees with fd_step to O(h) per step.
struct SplitState {
  SpectralField v;
  SpectralField z;
  SpectralField combined() const;
};

SplitState fd_split_step(const SplitState& s, double h, const ModelParams& params,
                         const NoiseSpec& noise, const CounterRng& rng,
                         std::uint64_t step);

struct TwinSample {
  double t = 0.0;
  double diff_l2 = 0.0;
  double diff_grad_l2 = 0.0;
  double u_h1 = 0.0;
  double v_h1 = 0.0;
  double u_hdot1 = 0.0;
  double v_hdot1 = 0.0;
  double exp_h1_u = 0.0;
  double exp_h1_v = 0.0;
};

// co-evolves two deterministic trajectories with identical stepping
std::vector<TwinSample> twin_evolve(const SpectralField& u0, const SpectralField& v0,
                                    double T, const StepperConfig& config,
                                    const ModelParams& params, double beta_plus);

}  // namespace mtnls
