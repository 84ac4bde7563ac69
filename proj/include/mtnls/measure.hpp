#pragma once

#include <map>
#include <string>
#include <vector>

#include "mtnls/dynamics.hpp"

namespace mtnls {

struct EnsembleSpec {
  std::size_t trajectories = 100;
  double burn_in = 0.0;
  double horizon = 1.0;

  enum class Init { Fixed, GaussianModes, Snapshot };
  Init init = Init::GaussianModes;
  SpectralField fixed;             // Init::Fixed
  std::vector<double> sigma;       // Init::GaussianModes; empty = noise coefficients
  std::string snapshot_path;       // Init::Snapshot

  void validate() const;
};

// Batch-means aggregate: the standard error comes from >= min_batches batch
// means (trajectories are the batches when there are enough of them), not
// from raw autocorrelated samples.
struct EnsembleStats {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  std::size_t batches = 0;
  std::size_t count = 0;

  static EnsembleStats from_samples(const std::vector<double>& values,
                                    int min_batches = 20);
};

struct TrajectorySeries {
  std::uint64_t traj = 0;
  std::vector<double> t;
  std::vector<double> M;     // mass
  std::vector<double> E;     // energy
  std::vector<double> Mtot;  // <u, L(u)>
  std::vector<double> H1;
};

SpectralField sample_initial(const EnsembleSpec& spec, const BasisPtr& basis,
                             const NoiseSpec& noise, std::uint64_t seed,
                             std::uint64_t traj);

// Runs spec.trajectories independent paths of the damped/driven flow. RNG
// streams are disjoint per trajectory, so the parallel and serial runners
// produce identical output in identical order.
std::vector<TrajectorySeries> run_ensemble(const EnsembleSpec& spec,
                                           const ModelParams& params,
                                           const NoiseSpec& noise,
                                           const StepperConfig& config,
                                           const BasisPtr& basis, int workers);

std::vector<TrajectorySeries> run_ensemble_serial(const EnsembleSpec& spec,
                                                  const ModelParams& params,
                                                  const NoiseSpec& noise,
                                                  const StepperConfig& config,
                                                  const BasisPtr& basis);

// Time-and-ensemble averages of the registered observables after burn-in.
std::map<std::string, EnsembleStats> kb_average(
    const std::vector<TrajectorySeries>& series, double burn_in);

struct ItoBalance {
  double t = 0.0;
  double residual = 0.0;   // E M(t) + alpha int E<u,L(u)> - E M(0) - alpha A0 t/2
  double std_error = 0.0;  // Monte Carlo, across trajectories
  double bias = 0.0;       // O(h) discretization estimate from a half-step rerun
  double allowed() const { return 3.0 * std_error + bias; }
};

// Checkpoints must land on sample times of the stride grid.
std::vector<ItoBalance> ito_mass_balance(const EnsembleSpec& spec,
                                         const ModelParams& params,
                                         const NoiseSpec& noise,
                                         const StepperConfig& config,
                                         const BasisPtr& basis,
                                         const std::vector<double>& checkpoints,
                                         int workers);

struct StationaryReport {
  double mean_Mtot = 0.0;
  double std_error = 0.0;
  double target = 0.0;  // A0 / 2
  double ratio = 0.0;
  double A0 = 0.0;
  // equilibration gate: least-squares slope of the ensemble-mean mass over
  // the last half of the post-burn-in window, passed when |slope| <= 2 se
  double mass_slope = 0.0;
  double mass_slope_se = 0.0;
  bool equilibrated = false;
};

StationaryReport stationary_identity(const EnsembleSpec& spec,
                                     const ModelParams& params,
                                     const NoiseSpec& noise,
                                     const StepperConfig& config,
                                     const BasisPtr& basis, int workers);

struct ScaleReport {
  double scale = 1.0;
  double A0 = 0.0;
  bool ok = false;
  std::string error;
  StationaryReport report;
};

std::vector<ScaleReport> noise_scaling_experiment(const EnsembleSpec& spec,
                                                  const ModelParams& params,
                                                  const NoiseSpec& noise,
                                                  const StepperConfig& config,
                                                  const BasisPtr& basis,
                                                  const std::vector<double>& scales,
                                                  int workers);

}  // namespace mtnls
