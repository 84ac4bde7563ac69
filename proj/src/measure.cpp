#include "mtnls/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <omp.h>

#include "mtnls/errors.hpp"

namespace mtnls {

namespace {

// step index reserved for initial-datum sampling (never reached by stepping)
constexpr std::uint64_t kInitStep = ~std::uint64_t{0};

}  // namespace

void EnsembleSpec::validate() const {
  if (trajectories < 1) throw ConfigError("ensemble: trajectories must be >= 1");
  if (!(burn_in >= 0.0)) throw ConfigError("ensemble: burn_in must be >= 0");
  if (!(horizon > burn_in)) throw ConfigError("ensemble: horizon must exceed burn_in");
}

EnsembleStats EnsembleStats::from_samples(const std::vector<double>& values,
                                          int min_batches) {
  EnsembleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  s.mean = mean;
  if (values.size() < 2) return s;

  const std::size_t nb = std::min<std::size_t>(
      values.size(), static_cast<std::size_t>(std::max(min_batches, 2)));
  std::vector<double> batch(nb, 0.0);
  std::vector<std::size_t> bc(nb, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t b = i * nb / values.size();
    batch[b] += values[i];
    ++bc[b];
  }
  double var = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    batch[b] /= static_cast<double>(bc[b]);
    var += (batch[b] - mean) * (batch[b] - mean);
  }
  var /= static_cast<double>(nb - 1);
  s.batches = nb;
  s.variance = var;
  s.std_error = std::sqrt(var / static_cast<double>(nb));
  return s;
}

SpectralField sample_initial(const EnsembleSpec& spec, const BasisPtr& basis,
                             const NoiseSpec& noise, std::uint64_t seed,
                             std::uint64_t traj) {
  switch (spec.init) {
    case EnsembleSpec::Init::Fixed: {
      if (!spec.fixed.basis) throw ConfigError("ensemble: fixed initial field unset");
      if (spec.fixed.basis != basis)
        throw UsageError("ensemble: fixed initial field has a different basis");
      return spec.fixed;
    }
    case EnsembleSpec::Init::Snapshot: {
      SpectralField u = load_snapshot(spec.snapshot_path);
      if (u.coeff.size() != basis->mode_count())
        throw ConfigError("ensemble: snapshot mode count mismatch");
      u.basis = basis;
      return u;
    }
    case EnsembleSpec::Init::GaussianModes:
    default: {
      const std::vector<double>& sg = spec.sigma.empty() ? noise.a : spec.sigma;
      if (sg.size() != basis->mode_count())
        throw ConfigError("ensemble: sigma vector length mismatch");
      SpectralField u(basis);
      CounterRng rng{seed, traj};
      const double c = 1.0 / std::sqrt(2.0);  // E|u_n|^2 = sigma_n^2
      for (std::size_t n = 0; n < u.coeff.size(); ++n) {
        auto [g1, g2] = rng.gaussian_pair(kInitStep, n);
        u.coeff[n] = sg[n] * Complex{c * g1, c * g2};
      }
      return u;
    }
  }
}

namespace {

TrajectorySeries run_trajectory(const EnsembleSpec& spec, const ModelParams& params,
                                const NoiseSpec& noise, const StepperConfig& config,
                                const BasisPtr& basis, std::uint64_t traj,
                                const SeriesPolicy& policy) {
  const long nsteps = std::lround(spec.horizon / config.h);
  const double h = spec.horizon / static_cast<double>(std::max(nsteps, 1L));
  const int stride = std::max(config.stride, 1);

  SpectralField u = sample_initial(spec, basis, noise, config.seed, traj);
  CounterRng rng{config.seed, traj};

  TrajectorySeries out;
  out.traj = traj;
  auto record = [&](double t) {
    out.t.push_back(t);
    out.M.push_back(mass(u));
    out.E.push_back(energy(u, params, policy));
    out.Mtot.push_back(inner(u, dissipation_L(u, params).total));
    out.H1.push_back(sobolev_norm(u, 1.0));
  };

  record(0.0);
  for (long s = 0; s < nsteps; ++s) {
    try {
      u = fd_step(u, h, params, noise, rng, static_cast<std::uint64_t>(s));
    } catch (const std::runtime_error& e) {
      throw OverflowError("trajectory " + std::to_string(traj) + " failed at t = " +
                          std::to_string(static_cast<double>(s) * h) + ": " + e.what());
    }
    if ((s + 1) % stride == 0 || s + 1 == nsteps)
      record(static_cast<double>(s + 1) * h);
  }
  return out;
}

std::vector<TrajectorySeries> run_all(const EnsembleSpec& spec,
                                      const ModelParams& params,
                                      const NoiseSpec& noise,
                                      const StepperConfig& config,
                                      const BasisPtr& basis, int workers) {
  spec.validate();
  const SeriesPolicy policy;
  const std::size_t K = spec.trajectories;
  std::vector<TrajectorySeries> out(K);
  std::vector<std::string> failures(K);

  if (workers <= 1) {
    for (std::size_t k = 0; k < K; ++k) {
      try {
        out[k] = run_trajectory(spec, params, noise, config, basis, k, policy);
      } catch (const std::runtime_error& e) {
        failures[k] = e.what();
      }
    }
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long long k = 0; k < static_cast<long long>(K); ++k) {
      try {
        out[k] = run_trajectory(spec, params, noise, config, basis,
                                static_cast<std::uint64_t>(k), policy);
      } catch (const std::runtime_error& e) {
        failures[k] = e.what();
      }
    }
  }

  std::ostringstream failed;
  int nfail = 0;
  for (std::size_t k = 0; k < K; ++k)
    if (!failures[k].empty()) {
      if (nfail++ < 8) failed << (nfail > 1 ? "; " : "") << failures[k];
    }
  if (nfail > 0)
    throw OverflowError("ensemble: " + std::to_string(nfail) +
                        " trajectory(ies) failed: " + failed.str());
  return out;
}

}  // namespace

std::vector<TrajectorySeries> run_ensemble(const EnsembleSpec& spec,
                                           const ModelParams& params,
                                           const NoiseSpec& noise,
                                           const StepperConfig& config,
                                           const BasisPtr& basis, int workers) {
  return run_all(spec, params, noise, config, basis, std::max(workers, 1));
}

std::vector<TrajectorySeries> run_ensemble_serial(const EnsembleSpec& spec,
                                                  const ModelParams& params,
                                                  const NoiseSpec& noise,
                                                  const StepperConfig& config,
                                                  const BasisPtr& basis) {
  return run_all(spec, params, noise, config, basis, 1);
}

namespace {

// time average of one observable after burn-in, one value per trajectory
std::vector<double> per_traj_time_average(const std::vector<TrajectorySeries>& series,
                                          const std::vector<double> TrajectorySeries::*obs,
                                          double burn_in) {
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (s.t[i] >= burn_in) {
        acc += (s.*obs)[i];
        ++cnt;
      }
    out.push_back(cnt > 0 ? acc / static_cast<double>(cnt) : 0.0);
  }
  return out;
}

}  // namespace

std::map<std::string, EnsembleStats> kb_average(
    const std::vector<TrajectorySeries>& series, double burn_in) {
  std::map<std::string, EnsembleStats> out;
  out["M"] = EnsembleStats::from_samples(
      per_traj_time_average(series, &TrajectorySeries::M, burn_in));
  out["E"] = EnsembleStats::from_samples(
      per_traj_time_average(series, &TrajectorySeries::E, burn_in));
  out["Mtot"] = EnsembleStats::from_samples(
      per_traj_time_average(series, &TrajectorySeries::Mtot, burn_in));
  out["H1"] = EnsembleStats::from_samples(
      per_traj_time_average(series, &TrajectorySeries::H1, burn_in));
  return out;
}

namespace {

std::size_t sample_index_at(const TrajectorySeries& s, double t) {
  for (std::size_t i = 0; i < s.t.size(); ++i)
    if (std::abs(s.t[i] - t) <= 1e-9 * (1.0 + std::abs(t))) return i;
  throw UsageError("checkpoint t = " + std::to_string(t) +
                   " does not land on a sample time");
}

// per-trajectory residuals of the mass balance at each checkpoint
std::vector<std::vector<double>> balance_residuals(
    const std::vector<TrajectorySeries>& series, double alpha, double A0,
    const std::vector<double>& checkpoints) {
  std::vector<std::vector<double>> res(checkpoints.size());
  for (const auto& s : series) {
    // trapezoid cumulative integral of Mtot on the sample grid
    std::vector<double> cum(s.t.size(), 0.0);
    for (std::size_t i = 1; i < s.t.size(); ++i)
      cum[i] = cum[i - 1] +
               0.5 * (s.t[i] - s.t[i - 1]) * (s.Mtot[i] + s.Mtot[i - 1]);
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const std::size_t i = sample_index_at(s, checkpoints[c]);
      res[c].push_back(s.M[i] + alpha * cum[i] - s.M[0] -
                       alpha * (A0 / 2.0) * checkpoints[c]);
    }
  }
  return res;
}

}  // namespace

std::vector<ItoBalance> ito_mass_balance(const EnsembleSpec& spec,
                                         const ModelParams& params,
                                         const NoiseSpec& noise,
                                         const StepperConfig& config,
                                         const BasisPtr& basis,
                                         const std::vector<double>& checkpoints,
                                         int workers) {
  for (double t : checkpoints)
    if (!(t >= 0.0 && t <= spec.horizon))
      throw ConfigError("ito_mass_balance: checkpoint outside [0, horizon]");

  const double A0 = noise.A0();
  auto series = run_ensemble(spec, params, noise, config, basis, workers);
  auto res = balance_residuals(series, params.alpha, A0, checkpoints);

  StepperConfig half = config;
  half.h = config.h / 2.0;
  half.stride = config.stride * 2;
  auto series_h = run_ensemble(spec, params, noise, half, basis, workers);
  auto res_h = balance_residuals(series_h, params.alpha, A0, checkpoints);

  std::vector<ItoBalance> out(checkpoints.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    EnsembleStats full = EnsembleStats::from_samples(res[c]);
    EnsembleStats halves = EnsembleStats::from_samples(res_h[c]);
    out[c].t = checkpoints[c];
    out[c].residual = full.mean;
    out[c].std_error = full.std_error;
    // R_h - R_{h/2} ~ (bias at h)/2 for an O(h)-biased scheme
    out[c].bias = 2.0 * std::abs(full.mean - halves.mean);
  }
  return out;
}

StationaryReport stationary_identity(const EnsembleSpec& spec,
                                     const ModelParams& params,
                                     const NoiseSpec& noise,
                                     const StepperConfig& config,
                                     const BasisPtr& basis, int workers) {
  auto series = run_ensemble(spec, params, noise, config, basis, workers);

  StationaryReport rep;
  rep.A0 = noise.A0();
  rep.target = rep.A0 / 2.0;
  EnsembleStats mtot = EnsembleStats::from_samples(
      per_traj_time_average(series, &TrajectorySeries::Mtot, spec.burn_in));
  rep.mean_Mtot = mtot.mean;
  rep.std_error = mtot.std_error;
  rep.ratio = rep.target != 0.0 ? rep.mean_Mtot / rep.target : 0.0;

  // ensemble-mean mass on the shared sample grid
  const auto& t = series.front().t;
  std::vector<double> meanM(t.size(), 0.0);
  for (const auto& s : series)
    for (std::size_t i = 0; i < t.size(); ++i) meanM[i] += s.M[i];
  for (double& v : meanM) v /= static_cast<double>(series.size());

  std::size_t lo = t.size();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= spec.burn_in) {
      lo = i;
      break;
    }
  lo = lo + (t.size() - lo) / 2;  // last half of the post-burn-in window
  const std::size_t m = t.size() - lo;
  if (m >= 3) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = lo; i < t.size(); ++i) {
      st += t[i];
      sy += meanM[i];
      stt += t[i] * t[i];
      sty += t[i] * meanM[i];
    }
    const double dm = static_cast<double>(m);
    const double denom = dm * stt - st * st;
    rep.mass_slope = (dm * sty - st * sy) / denom;
    const double icept = (sy - rep.mass_slope * st) / dm;
    double ss = 0.0;
    for (std::size_t i = lo; i < t.size(); ++i) {
      const double r = meanM[i] - icept - rep.mass_slope * t[i];
      ss += r * r;
    }
    rep.mass_slope_se = std::sqrt(ss / (dm - 2.0) * dm / denom);
    rep.equilibrated = std::abs(rep.mass_slope) <= 2.0 * rep.mass_slope_se;
  }
  return rep;
}

std::vector<ScaleReport> noise_scaling_experiment(
    const EnsembleSpec& spec, const ModelParams& params, const NoiseSpec& noise,
    const StepperConfig& config, const BasisPtr& basis,
    const std::vector<double>& scales, int workers) {
  std::vector<ScaleReport> out;
  for (double lam : scales) {
    ScaleReport r;
    r.scale = lam;
    try {
      NoiseSpec scaled = noise.scaled(lam);
      r.A0 = scaled.A0();
      r.report = stationary_identity(spec, params, scaled, config, basis, workers);
      r.ok = true;
    } catch (const std::runtime_error& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mtnls
