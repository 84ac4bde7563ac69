// End-to-end acceptance gate: one pass/fail line per criterion, nonzero exit
// if any fails. Tolerances are pinned here, not configurable.
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <numbers>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mtnls/dissipation.hpp"
#include "mtnls/dynamics.hpp"
#include "mtnls/functionals.hpp"
#include "mtnls/measure.hpp"
#include "mtnls/yudovich.hpp"

using namespace mtnls;
using mtnls::testing::random_field;

namespace {

constexpr double kPi = std::numbers::pi;

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : ": ", detail.c_str());
  if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

ModelParams mild_params() {
  ModelParams p;
  p.beta = 0.5;
  p.gamma = 2.5;
  p.C = 1.0;
  p.C1 = 1.0;
  p.C2 = 1.0;
  return p;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

int main() {
  const ModelParams p = mild_params();
  const SeriesPolicy policy;

  criterion("single-mode-exact-solution", [&] {
    // one Fourier mode has spatially constant modulus, so the flow is an
    // explicit phase rotation; the splitting must reproduce it to 1e-10
    auto basis = make_basis(BasisKind::TorusFourier, 8);
    std::size_t n1 = 0;
    for (std::size_t n = 0; n < basis->mode_count(); ++n)
      if (basis->modes()[n].k1 == 1 && basis->modes()[n].k2 == 0) n1 = n;
    const Complex c0{0.3, 0.1};
    SpectralField u(basis);
    u.coeff[n1] = c0;
    StepperConfig cfg;
    cfg.h = 1e-3;
    SpectralField uT = deterministic_evolve(u, 1.0, cfg, p);
    const double rho = std::norm(c0) / (4.0 * kPi * kPi);
    SpectralField exact(basis);
    exact.coeff[n1] =
        c0 * std::polar(1.0, -(basis->lambda(n1) + std::expm1(p.beta * rho)));
    const double err = sobolev_norm(uT - exact, 0.0);
    report("single-mode-exact-solution", err <= 1e-10, "L2 error " + fmt(err));
  });

  criterion("mass-conservation-and-energy-order", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 8);
    SpectralField u0 = random_field(basis, 0.3, 2.0, 43);
    const double m0 = mass(u0);
    const double E0 = energy(u0, p, policy);
    StepperConfig cfg;
    cfg.h = 1e-2;
    SpectralField uT = deterministic_evolve(u0, 10.0, cfg, p);
    const double drift = std::abs(mass(uT) - m0) / m0;

    auto edrift = [&](double h) {
      StepperConfig c;
      c.h = h;
      return std::abs(energy(deterministic_evolve(u0, 1.0, c, p), p, policy) - E0);
    };
    const double ratio = edrift(2e-2) / edrift(1e-2);
    report("mass-conservation-and-energy-order",
           drift <= 1e-8 && ratio >= 3.5 && ratio <= 4.5,
           "relative mass drift " + fmt(drift) + ", halving ratio " + fmt(ratio));
  });

  criterion("ou-second-moment-law", [&] {
    // E |z(T)|^2 = alpha A0 T for the exact per-mode convolution step
    auto basis = make_basis(BasisKind::TorusFourier, 2);
    NoiseSpec noise = NoiseSpec::power_law(*basis, 1.5, 0.3);
    const double alpha = p.alpha;
    const int paths = 2000;
    const double T = 0.5, h = 1e-2;
    const long nsteps = std::lround(T / h);
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < paths; ++k) {
      SpectralField z(basis);
      CounterRng rng{29, static_cast<std::uint64_t>(k)};
      for (long s = 0; s < nsteps; ++s)
        z = ou_convolution_step(z, h, alpha, noise, rng,
                                static_cast<std::uint64_t>(s));
      const double m2 = sobolev_norm(z, 0.0);
      sum += m2 * m2;
      sumsq += m2 * m2 * m2 * m2;
    }
    const double mean = sum / paths;
    const double se = std::sqrt((sumsq / paths - mean * mean) / (paths - 1.0));
    const double want = alpha * noise.A0() * T;
    report("ou-second-moment-law", std::abs(mean - want) <= 3.0 * se,
           "mean " + fmt(mean) + ", target " + fmt(want) + ", 3se " + fmt(3 * se));
  });

  criterion("ito-mass-balance", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 2);
    NoiseSpec noise = NoiseSpec::power_law(*basis, 1.5, 0.3);
    EnsembleSpec spec;
    spec.trajectories = 2000;
    spec.horizon = 2.0;
    StepperConfig cfg;
    cfg.h = 5e-3;
    cfg.stride = 5;
    cfg.seed = 11;
    auto res = ito_mass_balance(spec, p, noise, cfg, basis, {0.5, 1.0, 2.0}, 2);
    bool ok = true;
    std::string detail;
    for (const auto& r : res) {
      ok = ok && std::abs(r.residual) <= r.allowed();
      detail += "t=" + fmt(r.t) + " |res|=" + fmt(std::abs(r.residual)) +
                "<=?" + fmt(r.allowed()) + " ";
    }
    report("ito-mass-balance", ok, detail);
  });

  criterion("stationary-injection-dissipation-balance", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 1);
    NoiseSpec noise = NoiseSpec::power_law(*basis, 1.5, 0.3);
    EnsembleSpec spec;
    spec.trajectories = 512;
    spec.burn_in = 2.0;
    spec.horizon = 6.0;
    StepperConfig cfg;
    cfg.h = 1e-2;
    cfg.stride = 20;
    cfg.seed = 13;
    StationaryReport rep = stationary_identity(spec, p, noise, cfg, basis, 2);
    report("stationary-injection-dissipation-balance",
           rep.equilibrated && rep.ratio >= 0.9 && rep.ratio <= 1.1,
           "ratio " + fmt(rep.ratio) + ", equilibrated " +
               (rep.equilibrated ? "yes" : "no"));
  });

  criterion("noise-scaling", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 1);
    NoiseSpec noise = NoiseSpec::power_law(*basis, 1.5, 0.2);
    EnsembleSpec spec;
    spec.trajectories = 128;
    spec.burn_in = 2.0;
    spec.horizon = 6.0;
    StepperConfig cfg;
    cfg.h = 1e-2;
    cfg.stride = 20;
    cfg.seed = 17;
    auto reports =
        noise_scaling_experiment(spec, p, noise, cfg, basis, {0.5, 1.0, 2.0}, 2);
    bool ok = reports.size() == 3;
    for (const auto& r : reports) ok = ok && r.ok;
    // injection rate scales exactly quadratically in the amplitude factor
    ok = ok && reports[0].A0 == 0.25 * noise.A0() &&
         reports[1].A0 == noise.A0() && reports[2].A0 == 4.0 * noise.A0();
    // stationary mean dissipation nondecreasing within the error bars
    std::string detail;
    for (std::size_t i = 0; i + 1 < reports.size() && ok; ++i) {
      const auto& a = reports[i].report;
      const auto& b = reports[i + 1].report;
      ok = ok && b.mean_Mtot + 3.0 * b.std_error >= a.mean_Mtot - 3.0 * a.std_error;
    }
    for (const auto& r : reports)
      detail += "scale " + fmt(r.scale) + ": mean " + fmt(r.report.mean_Mtot) + " ";
    report("noise-scaling", ok, detail);
  });

  criterion("modified-energy-identity", [&] {
    // the closed-form dissipation functional matches <u, L(u)> to 1e-10
    auto basis = make_basis(BasisKind::TorusFourier, 4);
    bool ok = true;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      SpectralField u = random_field(basis, 0.3, 1.0, 5000 + s);
      ModifiedEnergyReport r = mass_dissipation_rate(u, p, policy);
      const double direct = inner(u, dissipation_L(u, p).total);
      const double err = std::abs(r.Mtot - direct) / (1.0 + std::abs(direct));
      worst = std::max(worst, err);
      ok = ok && err <= 1e-10;
    }
    report("modified-energy-identity", ok, "worst relative gap " + fmt(worst));
  });

  criterion("laplacian-pairing-inequality", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 6, 4);
    bool ok = true;
    int checked = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const int pw = static_cast<int>(s % 7);  // powers 0..6
      SpectralField u = random_field(basis, 0.5, 1.5, 7000 + s);
      PairingCheck pc = laplacian_pairing_inequality(u, pw);
      ok = ok && pc.lhs >= pc.rhs - 1e-8 * (1.0 + std::abs(pc.lhs));
      ++checked;
    }
    report("laplacian-pairing-inequality", ok && checked == 100,
           std::to_string(checked) + " fields, powers 0..6");
  });

  criterion("legendre-duality", [&] {
    bool ok = true;
    for (int i = 0; i <= 1000 && ok; ++i) {
      const double x = 10.0 * i / 1000.0;
      const double want = x * x * std::exp(x * x);
      const double got = legendre_phi(1.0, legendre_f(1.0, x));
      ok = std::abs(got - want) <= 1e-10 * (1.0 + want);
    }
    CounterRng rng{99, 0};
    int pairs = 0;
    for (std::uint64_t i = 0; i < 100 && ok; ++i) {
      auto [g1, g2] = rng.gaussian_pair(i, 1);
      const double x = 3.0 * std::abs(std::erf(g1));
      const double y = 3.0 * std::abs(std::erf(g2));
      for (double c : {0.25, 1.0, 4.0})
        ok = ok && x * y <= c * legendre_phi(1.0, x) +
                                legendre_phi_star(1.0, c, y) + 1e-9;
      ++pairs;
    }
    report("legendre-duality", ok && pairs == 100,
           "functional equation on [0,10] and Young inequality on 100 pairs");
  });

  criterion("series-domination-along-trajectory", [&] {
    const double bp = 1.05 * p.beta;
    const SeriesConstant sc = series_constant(bp, p.gamma);
    bool ok = sc.converges && !series_constant(bp, 2.0 * bp).converges;

    auto basis = make_basis(BasisKind::TorusFourier, 4);
    std::vector<SpectralField> samples;
    StepperConfig cfg;
    cfg.h = 1e-2;
    cfg.stride = 10;
    (void)deterministic_evolve(random_field(basis, 0.3, 1.5, 31), 1.0, cfg, p,
                               [&](double, const SpectralField& u) {
                                 samples.push_back(u);
                               });
    LemmaReport rep =
        lemma_integrability_check(samples, cfg.h * cfg.stride, bp, p.gamma, policy);
    ok = ok && rep.samples.size() == samples.size() &&
         rep.worst_ratio <= 1.0 + 1e-10 && rep.integral_lhs_sq > 0.0;
    report("series-domination-along-trajectory", ok,
           "worst lhs/rhs " + fmt(rep.worst_ratio) + " over " +
               std::to_string(samples.size()) + " samples");
  });

  criterion("continuity-of-the-flow-map", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 4);
    SpectralField u0 = random_field(basis, 0.3, 1.5, 21);
    SpectralField phi = random_field(basis, 0.3, 1.0, 22);
    phi = (1.0 / sobolev_norm(phi, 0.0)) * phi;
    StepperConfig cfg;
    cfg.h = 1e-2;
    cfg.stride = 5;
    auto reps = divergence_experiment(u0, phi, {1e-2, 1e-3, 1e-4}, 0.5, cfg, p,
                                      1.05 * p.beta);
    bool ok = reps.size() == 3;
    std::string detail;
    for (std::size_t i = 0; i + 1 < reps.size() && ok; ++i)
      ok = reps[i].sup_diff_l2 > reps[i + 1].sup_diff_l2 &&
           reps[i].sup_diff_h1 > reps[i + 1].sup_diff_h1;
    for (const auto& r : reps) {
      detail += "eps=" + fmt(r.eps) + " sup=" + fmt(r.sup_diff_h1) + " ";
      if (!ok) break;
      for (double lam : {0.5, 0.9, 0.99, 0.999}) {
        BoundCurve b = yudovich_bound(r, lam, calibrate_c3(r, lam));
        ok = ok && b.hold_fraction == 1.0;
      }
    }
    report("continuity-of-the-flow-map", ok, detail);
  });

  criterion("bit-identical-reproducibility", [&] {
    auto basis = make_basis(BasisKind::TorusFourier, 2);
    NoiseSpec noise = NoiseSpec::power_law(*basis, 1.5, 0.3);
    EnsembleSpec spec;
    spec.trajectories = 32;
    spec.horizon = 0.5;
    StepperConfig cfg;
    cfg.h = 1e-2;
    cfg.stride = 10;
    cfg.seed = 23;
    auto a = run_ensemble(spec, p, noise, cfg, basis, 2);
    auto b = run_ensemble_serial(spec, p, noise, cfg, basis);
    auto c = run_ensemble(spec, p, noise, cfg, basis, 4);
    bool ok = a.size() == b.size() && a.size() == c.size();
    for (std::size_t k = 0; ok && k < a.size(); ++k) {
      ok = a[k].t == b[k].t && a[k].t == c[k].t;
      for (std::size_t i = 0; ok && i < a[k].t.size(); ++i)
        ok = a[k].M[i] == b[k].M[i] && a[k].M[i] == c[k].M[i] &&
             a[k].E[i] == b[k].E[i] && a[k].E[i] == c[k].E[i] &&
             a[k].Mtot[i] == b[k].Mtot[i] && a[k].Mtot[i] == c[k].Mtot[i] &&
             a[k].H1[i] == b[k].H1[i] && a[k].H1[i] == c[k].H1[i];
    }
    report("bit-identical-reproducibility", ok,
           "serial vs 2 and 4 workers, all observables compared bitwise");
  });

  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
