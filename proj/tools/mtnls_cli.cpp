#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mtnls/config.hpp"
#include "mtnls/dissipation.hpp"
#include "mtnls/dynamics.hpp"
#include "mtnls/errors.hpp"
#include "mtnls/functionals.hpp"
#include "mtnls/measure.hpp"
#include "mtnls/observables.hpp"
#include "mtnls/yudovich.hpp"

namespace fs = std::filesystem;
using namespace mtnls;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  int workers = 1;
  bool seed_override = false;
  std::uint64_t seed = 0;
};

struct RunContext {
  RunConfig config;
  BasisPtr basis;
  NoiseSpec noise;
  fs::path out;
  ManifestInfo manifest;
  std::chrono::steady_clock::time_point start;
};

RunContext make_context(const CliOptions& opts, const std::string& subcommand) {
  RunContext ctx;
  ctx.start = std::chrono::steady_clock::now();
  ctx.config = RunConfig::from_file(opts.config_path);
  if (opts.seed_override) ctx.config.stepper.seed = opts.seed;
  ctx.basis = make_basis(ctx.config.kind, ctx.config.K, ctx.config.q);
  ctx.noise = NoiseSpec::power_law(*ctx.basis, ctx.config.noise_r,
                                   ctx.config.noise_a0, ctx.config.noise_scale);
  ctx.out = opts.out_dir;
  fs::create_directories(ctx.out / "snapshots");
  fs::create_directories(ctx.out / "reports");
  ctx.manifest.subcommand = subcommand;
  ctx.manifest.config_hash = fnv1a_hash(ctx.config.source_text);
  ctx.manifest.config_text = ctx.config.source_text;
  ctx.manifest.seed = ctx.config.stepper.seed;
  ctx.manifest.workers = opts.workers;
  ctx.manifest.warnings = ctx.config.warnings;
  for (const auto& w : ctx.config.warnings) std::cerr << w << '\n';
  return ctx;
}

void finish(RunContext& ctx) {
  ctx.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start)
          .count();
  std::ofstream mf(ctx.out / "manifest.json");
  write_manifest(ctx.manifest, ctx.config, mf);
}

// short numeric label for report keys (full precision stays in the values)
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// deterministic pseudo-random smooth field: sigma_n = amplitude (1+lambda_n)^{-decay}
SpectralField smooth_random_field(const BasisPtr& basis, double amplitude,
                                  double decay, std::uint64_t seed,
                                  std::uint64_t traj = 0) {
  SpectralField u(basis);
  CounterRng rng{seed, traj};
  const double c = 1.0 / std::sqrt(2.0);
  for (std::size_t n = 0; n < u.coeff.size(); ++n) {
    auto [g1, g2] = rng.gaussian_pair(~std::uint64_t{0} - 1, n);
    const double sd = amplitude * std::pow(1.0 + basis->lambda(n), -decay);
    u.coeff[n] = sd * Complex{c * g1, c * g2};
  }
  return u;
}

SpectralField initial_field(const RunContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const std::string init = cfg.exp_string("init", "gaussian");
  const double amplitude = cfg.exp_double("amplitude", 0.1);
  if (init == "gaussian")
    return smooth_random_field(ctx.basis, amplitude,
                               cfg.exp_double("decay", 2.0), cfg.stepper.seed);
  if (init == "single-mode") {
    const int k1 = static_cast<int>(cfg.exp_int("k1", 1));
    const int k2 = static_cast<int>(cfg.exp_int("k2", 0));
    SpectralField u(ctx.basis);
    for (std::size_t n = 0; n < u.coeff.size(); ++n)
      if (ctx.basis->modes()[n].k1 == k1 && ctx.basis->modes()[n].k2 == k2) {
        u.coeff[n] = amplitude;
        return u;
      }
    throw ConfigError("experiment: mode (" + std::to_string(k1) + "," +
                      std::to_string(k2) + ") not in the basis");
  }
  if (init == "constant") {
    if (ctx.basis->kind() != BasisKind::TorusFourier)
      throw ConfigError("experiment: constant initial data needs the torus basis");
    SpectralField u(ctx.basis);
    for (std::size_t n = 0; n < u.coeff.size(); ++n)
      if (ctx.basis->lambda(n) == 0.0) u.coeff[n] = amplitude;
    return u;
  }
  if (init == "snapshot") {
    SpectralField u = load_snapshot(cfg.exp_string("snapshot", ""));
    if (u.coeff.size() != ctx.basis->mode_count())
      throw ConfigError("experiment: snapshot mode count mismatch");
    u.basis = ctx.basis;
    return u;
  }
  throw ConfigError("experiment: unknown init '" + init + "'");
}

EnsembleSpec ensemble_spec(const RunContext& ctx) {
  EnsembleSpec spec;
  spec.trajectories =
      static_cast<std::size_t>(ctx.config.exp_int("trajectories", 100));
  spec.burn_in = ctx.config.exp_double("burn_in", 0.0);
  spec.horizon = ctx.config.T;
  const std::string init = ctx.config.exp_string("init", "noise-modes");
  if (init == "fixed" || init == "single-mode" || init == "constant" ||
      init == "gaussian") {
    spec.init = EnsembleSpec::Init::Fixed;
    spec.fixed = initial_field(ctx);
  } else if (init == "snapshot") {
    spec.init = EnsembleSpec::Init::Snapshot;
    spec.snapshot_path = ctx.config.exp_string("snapshot", "");
  } else if (init == "noise-modes") {
    spec.init = EnsembleSpec::Init::GaussianModes;
  } else {
    throw ConfigError("experiment: unknown init '" + init + "'");
  }
  spec.validate();
  return spec;
}

int cmd_simulate(const CliOptions& opts) {
  RunContext ctx = make_context(opts, "simulate");
  const SeriesPolicy& policy = ctx.config.policy;
  const ModelParams& params = ctx.config.params;
  SpectralField u0 = initial_field(ctx);

  std::ofstream obs(ctx.out / "observables.ndjson");
  auto observer = [&](double t, const SpectralField& u) {
    ObservableRecord rec;
    rec.t = t;
    rec.set("M", mass(u));
    rec.set("E", energy(u, params, policy));
    rec.set("H1", sobolev_norm(u, 1.0));
    rec.set("L4", lp_norm(u.basis->to_grid(u), 4.0));
    write_ndjson(rec, obs);
  };
  SpectralField uT =
      deterministic_evolve(u0, ctx.config.T, ctx.config.stepper, params, observer);
  save_snapshot(uT, (ctx.out / "snapshots" / "final.bin").string());
  ctx.manifest.digests.emplace_back("final_mass", format_double(mass(uT)));
  ctx.manifest.digests.emplace_back("final_energy",
                                    format_double(energy(uT, params, policy)));
  finish(ctx);
  return kExitOk;
}

int cmd_fdsim(const CliOptions& opts) {
  RunContext ctx = make_context(opts, "fdsim");
  EnsembleSpec spec = ensemble_spec(ctx);
  auto series = run_ensemble(spec, ctx.config.params, ctx.noise,
                             ctx.config.stepper, ctx.basis, opts.workers);

  std::ofstream obs(ctx.out / "observables.ndjson");
  const auto& t = series.front().t;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double m = 0.0, e = 0.0, mt = 0.0, h1 = 0.0;
    for (const auto& s : series) {
      m += s.M[i];
      e += s.E[i];
      mt += s.Mtot[i];
      h1 += s.H1[i];
    }
    const double K = static_cast<double>(series.size());
    ObservableRecord rec;
    rec.t = t[i];
    rec.set("mean_M", m / K);
    rec.set("mean_E", e / K);
    rec.set("mean_Mtot", mt / K);
    rec.set("mean_H1", h1 / K);
    write_ndjson(rec, obs);
  }

  auto stats = kb_average(series, spec.burn_in);
  std::ofstream rep(ctx.out / "reports" / "kb_average.ndjson");
  for (const auto& [name, s] : stats) {
    ObservableRecord rec;
    rec.t = spec.horizon;
    rec.set("mean_" + name, s.mean);
    rec.set("stderr_" + name, s.std_error);
    write_ndjson(rec, rep);
    ctx.manifest.digests.emplace_back("kb_" + name, format_double(s.mean));
  }
  finish(ctx);
  return kExitOk;
}

int cmd_stationary(const CliOptions& opts) {
  RunContext ctx = make_context(opts, "stationary");
  EnsembleSpec spec = ensemble_spec(ctx);
  const auto scales = ctx.config.exp_list("scales", {1.0});

  auto reports = noise_scaling_experiment(spec, ctx.config.params, ctx.noise,
                                          ctx.config.stepper, ctx.basis, scales,
                                          opts.workers);
  std::ofstream rep(ctx.out / "reports" / "stationary.ndjson");
  bool any_failed = false;
  for (const auto& r : reports) {
    if (!r.ok) {
      any_failed = true;
      std::cerr << "scale " << r.scale << " failed: " << r.error << '\n';
      continue;
    }
    ObservableRecord rec;
    rec.t = spec.horizon;
    rec.set("scale", r.scale);
    rec.set("A0", r.A0);
    rec.set("mean_Mtot", r.report.mean_Mtot);
    rec.set("stderr", r.report.std_error);
    rec.set("target", r.report.target);
    rec.set("ratio", r.report.ratio);
    rec.set("mass_slope", r.report.mass_slope);
    rec.set("mass_slope_se", r.report.mass_slope_se);
    rec.set("equilibrated", r.report.equilibrated ? 1.0 : 0.0);
    write_ndjson(rec, rep);
    if (!r.report.equilibrated)
      ctx.manifest.warnings.push_back("scale " + label(r.scale) +
                                      ": not equilibrated");
    ctx.manifest.digests.emplace_back("A0_scale_" + label(r.scale),
                                      format_double(r.A0));
    ctx.manifest.digests.emplace_back("ratio_scale_" + label(r.scale),
                                      format_double(r.report.ratio));
  }
  finish(ctx);
  return any_failed ? kExitOverflow : kExitOk;
}

int cmd_yudovich(const CliOptions& opts) {
  RunContext ctx = make_context(opts, "yudovich");
  const ModelParams& params = ctx.config.params;
  const double beta_plus = ctx.config.exp_double("beta_plus", 1.05 * params.beta);
  const auto eps_list = ctx.config.exp_list("eps_list", {1e-2, 1e-3, 1e-4});
  const auto lambdas = ctx.config.exp_list("lambda_grid", {0.5, 0.9, 0.99, 0.999});

  SpectralField u0 = initial_field(ctx);
  SpectralField phi = smooth_random_field(
      ctx.basis, 1.0, ctx.config.exp_double("decay", 2.0), ctx.config.stepper.seed + 1);
  phi = (1.0 / sobolev_norm(phi, 0.0)) * phi;

  auto reports = divergence_experiment(u0, phi, eps_list, ctx.config.T,
                                       ctx.config.stepper, params, beta_plus);
  std::ofstream summary(ctx.out / "reports" / "yudovich_summary.ndjson");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::vector<BoundCurve> bounds;
    for (double lam : lambdas)
      bounds.push_back(yudovich_bound(r, lam, calibrate_c3(r, lam)));

    std::ofstream csv(ctx.out / "reports" /
                      ("yudovich_eps_" + std::to_string(i) + ".csv"));
    write_report_csv(r, bounds, csv);

    ObservableRecord rec;
    rec.t = ctx.config.T;
    rec.set("eps", r.eps);
    rec.set("z0", r.z.front());
    rec.set("sup_diff_l2", r.sup_diff_l2);
    rec.set("sup_diff_h1", r.sup_diff_h1);
    for (const auto& b : bounds)
      rec.set("hold_fraction_" + label(b.lambda), b.hold_fraction);
    write_ndjson(rec, summary);
    ctx.manifest.digests.emplace_back("sup_diff_h1_eps_" + label(r.eps),
                                      format_double(r.sup_diff_h1));
  }
  finish(ctx);
  return kExitOk;
}

// built-in property suite; prints one line per check, exits 4 on any failure
int cmd_check(const CliOptions& opts) {
  RunContext ctx = make_context(opts, "check");
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };

  const BasisPtr basis = ctx.basis;
  const std::uint64_t seed = ctx.config.stepper.seed;

  {  // Parseval and transform round-trip
    SpectralField u = smooth_random_field(basis, 1.0, 1.0, seed);
    GridField g = basis->to_grid(u);
    double quad = 0.0;
    for (const auto& v : g.values) quad += std::norm(v);
    quad = std::sqrt(quad * basis->quad_weight());
    const double par = sobolev_norm(u, 0.0);
    check("parseval", std::abs(quad - par) <= 1e-10 * (1.0 + par));

    SpectralField rt = basis->to_spectral(g);
    double err = 0.0, nrm = 0.0;
    for (std::size_t n = 0; n < u.coeff.size(); ++n) {
      err += std::norm(rt.coeff[n] - u.coeff[n]);
      nrm += std::norm(u.coeff[n]);
    }
    check("transform-round-trip", std::sqrt(err) <= 1e-12 * std::sqrt(nrm));
  }

  {  // Legendre functional equation and generalized Young inequality
    bool ok = true;
    for (int i = 0; i <= 100; ++i) {
      const double x = 10.0 * i / 100.0;
      const double want = x * x * std::exp(x * x);
      const double got = legendre_phi(1.0, legendre_f(1.0, x));
      if (std::abs(got - want) > 1e-10 * (1.0 + want)) ok = false;
    }
    check("legendre-functional-equation", ok);

    ok = true;
    CounterRng rng{seed, 7};
    for (std::uint64_t i = 0; i < 100; ++i) {
      auto [g1, g2] = rng.gaussian_pair(i, 0);
      const double x = 3.0 * std::abs(std::erf(g1));
      const double y = 3.0 * std::abs(std::erf(g2));
      const double c = 0.5;
      if (x * y > c * legendre_phi(1.0, x) + legendre_phi_star(1.0, c, y) + 1e-9)
        ok = false;
    }
    check("generalized-young", ok);
  }

  {  // Laplacian pairing inequality
    bool ok = true;
    for (int p = 0; p <= 6 && ok; ++p) {
      SpectralField u = smooth_random_field(basis, 0.5, 2.0, seed + p);
      PairingCheck pc = laplacian_pairing_inequality(u, p);
      if (pc.lhs < pc.rhs - 1e-8 * (1.0 + std::abs(pc.lhs)) - pc.alias_estimate)
        ok = false;
    }
    check("laplacian-pairing", ok);
  }

  if (basis->kind() == BasisKind::TorusFourier) {
    // single-mode exact solution
    std::size_t n1 = 0;
    for (std::size_t n = 0; n < basis->mode_count(); ++n)
      if (basis->modes()[n].k1 == 1 && basis->modes()[n].k2 == 0) n1 = n;
    SpectralField u(basis);
    const Complex c0{0.3, 0.1};
    u.coeff[n1] = c0;
    StepperConfig sc;
    sc.h = 1e-3;
    SpectralField uT =
        deterministic_evolve(u, 1.0, sc, ctx.config.params, nullptr);
    const double rho = std::norm(c0) / (4.0 * M_PI * M_PI);
    const Complex want =
        c0 * std::polar(1.0, -(basis->lambda(n1) +
                               std::expm1(ctx.config.params.beta * rho)));
    SpectralField ex(basis);
    ex.coeff[n1] = want;
    check("single-mode-exact", sobolev_norm(uT - ex, 0.0) <= 1e-10);
  }

  {  // OU second moment over a small ensemble
    const double alpha = 0.5;
    const int paths = 400;
    const double T = 0.5;
    const double h = 1e-2;
    const long nsteps = std::lround(T / h);
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < paths; ++k) {
      SpectralField z(basis);
      CounterRng rng{seed, static_cast<std::uint64_t>(k)};
      for (long s = 0; s < nsteps; ++s)
        z = ou_convolution_step(z, h, alpha, ctx.noise, rng,
                                static_cast<std::uint64_t>(s));
      const double m = sobolev_norm(z, 0.0);
      sum += m * m;
      sumsq += m * m * m * m;
    }
    const double mean = sum / paths;
    const double se =
        std::sqrt((sumsq / paths - mean * mean) / static_cast<double>(paths - 1));
    const double want = alpha * ctx.noise.A0() * T;
    check("ou-second-moment", std::abs(mean - want) <= 3.0 * se);
  }

  {  // modified-energy identity V + K = <u, L(u)>
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
      SpectralField u = smooth_random_field(basis, 0.05, 2.0, seed + 100 + i);
      try {
        ModifiedEnergyReport r =
            mass_dissipation_rate(u, ctx.config.params, ctx.config.policy);
        const double direct = inner(u, dissipation_L(u, ctx.config.params).total);
        if (std::abs(r.Mtot - direct) > 1e-10 * (1.0 + std::abs(direct))) ok = false;
      } catch (const CheckError&) {
        ok = false;
      }
    }
    check("modified-energy-identity", ok);
  }

  finish(ctx);
  return failures == 0 ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral simulator and verification harness for the 2-D "
               "exponential-nonlinearity Schrodinger flow"};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--out", opts.out_dir, "output directory");
  app.add_option("--workers", opts.workers, "parallel trajectory workers")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", opts.seed, "RNG seed override");

  std::map<std::string, int (*)(const CliOptions&)> handlers = {
      {"simulate", cmd_simulate}, {"fdsim", cmd_fdsim},
      {"stationary", cmd_stationary}, {"yudovich", cmd_yudovich},
      {"check", cmd_check},
  };
  for (auto& [name, fn] : handlers) {
    (void)fn;
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->add_option("config", opts.config_path, "run configuration file")
        ->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  opts.seed_override = seed_opt->count() > 0;

  try {
    return handlers.at(app.get_subcommands().front()->get_name())(opts);
  } catch (const ConfigError& e) {
    std::cerr << "{\"error\": \"validation\", \"message\": \"" << e.what()
              << "\"}\n";
    return kExitValidation;
  } catch (const UsageError& e) {
    std::cerr << "{\"error\": \"usage\", \"message\": \"" << e.what() << "\"}\n";
    return kExitValidation;
  } catch (const OverflowError& e) {
    std::cerr << "{\"error\": \"overflow\", \"message\": \"" << e.what()
              << "\"}\n";
    return kExitOverflow;
  } catch (const NumericalError& e) {
    std::cerr << "{\"error\": \"numerical\", \"message\": \"" << e.what()
              << "\"}\n";
    return kExitOverflow;
  } catch (const CheckError& e) {
    std::cerr << "{\"error\": \"check\", \"message\": \"" << e.what() << "\"}\n";
    return kExitCheckFailure;
  }
}
