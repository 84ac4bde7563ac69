#include "mtnls/yudovich.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "mtnls/errors.hpp"

namespace mtnls {

namespace {

double grad_lp_norm(const SpectralField& u, double p) {
  auto grad = u.basis->gradient(u);
  GridField mag(u.basis);
  for (std::size_t i = 0; i < mag.values.size(); ++i)
    mag.values[i] = std::sqrt(std::norm(grad[0].values[i]) +
                              std::norm(grad[1].values[i]));
  return lp_norm(mag, p);
}

double w1p_norm(const SpectralField& u, double p) {
  GridField g = u.basis->to_grid(u);
  return lp_norm(g, p) + grad_lp_norm(u, p);
}

}  // namespace

std::vector<YudovichReport> divergence_experiment(const SpectralField& u0,
                                                  const SpectralField& phi,
                                                  const std::vector<double>& eps_list,
                                                  double T,
                                                  const StepperConfig& config,
                                                  const ModelParams& params,
                                                  double beta_plus) {
  if (u0.basis != phi.basis) throw UsageError("divergence_experiment: basis mismatch");
  const double phinorm = sobolev_norm(phi, 0.0);
  if (std::abs(phinorm - 1.0) > 1e-8)
    throw UsageError("divergence_experiment: perturbation direction must have "
                     "unit L2 norm, got " + std::to_string(phinorm));
  if (!(T > 0.0)) throw ConfigError("divergence_experiment: T must be > 0");
  if (!(config.h > 0.0)) throw ConfigError("dynamics: h must be > 0");

  const long nsteps = std::lround(T / config.h);
  const double h = T / static_cast<double>(std::max(nsteps, 1L));
  const int stride = std::max(config.stride, 1);

  std::vector<YudovichReport> out;
  for (double eps : eps_list) {
    YudovichReport rep;
    rep.eps = eps;
    rep.beta_plus = beta_plus;
    rep.delta = params.delta;

    SpectralField u = u0;
    SpectralField v = u0;
    axpy(Complex{eps, 0.0}, phi, v);

    auto sample = [&](double t) {
      SpectralField d = u - v;
      const double z = sobolev_norm(d, 0.0);
      const double gradz = homogeneous_seminorm(d, 1.0);
      const double expsum = exp_h1_seminorm(u, beta_plus) +
                            exp_h1_seminorm(v, beta_plus);
      const double gval = (1.0 + homogeneous_seminorm(u, 1.0) +
                           homogeneous_seminorm(v, 1.0)) * expsum;
      const double w1p = w1p_norm(d, 2.0 + params.delta);
      const double gt = (1.0 + std::pow(w1p, 1.0 + params.delta / 2.0)) * expsum;

      if (!rep.t.empty()) {
        const double dt = t - rep.t.back();
        rep.G.push_back(rep.G.back() + 0.5 * dt * (rep.g.back() + gval));
        rep.Gtilde.push_back(rep.Gtilde.back() + 0.5 * dt * (rep.gtilde.back() + gt));
      } else {
        rep.G.push_back(0.0);
        rep.Gtilde.push_back(0.0);
      }
      rep.t.push_back(t);
      rep.z.push_back(z);
      rep.gradz.push_back(gradz);
      rep.g.push_back(gval);
      rep.gtilde.push_back(gt);
      rep.sup_diff_l2 = std::max(rep.sup_diff_l2, z);
      rep.sup_diff_h1 = std::max(rep.sup_diff_h1, sobolev_norm(d, 1.0));
    };

    sample(0.0);
    for (long s = 0; s < nsteps; ++s) {
      u = deterministic_step(u, h, params);
      v = deterministic_step(v, h, params);
      if ((s + 1) % stride == 0 || s + 1 == nsteps)
        sample(static_cast<double>(s + 1) * h);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

BoundCurve yudovich_bound(const YudovichReport& report, double lambda,
                          double C3_fit) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw UsageError("yudovich_bound: lambda must be in (0,1)");
  BoundCurve out;
  out.lambda = lambda;
  out.C3 = C3_fit;
  const double oml = 1.0 - lambda;
  const double z0 = report.z.empty() ? 0.0 : report.z.front();
  std::size_t held = 0;
  for (std::size_t i = 0; i < report.t.size(); ++i) {
    const double b = std::pow(
        std::pow(z0 * z0, oml) + C3_fit * std::sqrt(oml) * report.G[i], 1.0 / oml);
    out.bound.push_back(b);
    if (report.z[i] * report.z[i] <= b * (1.0 + 1e-12) + 1e-300) ++held;
  }
  out.hold_fraction =
      report.t.empty() ? 0.0
                       : static_cast<double>(held) / static_cast<double>(report.t.size());
  return out;
}

double calibrate_c3(const YudovichReport& report, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw UsageError("calibrate_c3: lambda must be in (0,1)");
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < report.t.size(); ++i) {
    const double dt = report.t[i + 1] - report.t[i];
    const double denom =
        dt * std::pow(report.z[i] * report.z[i], lambda) * report.g[i];
    if (denom < 1e-300) continue;
    const double num =
        report.z[i + 1] * report.z[i + 1] - report.z[i] * report.z[i];
    worst = std::max(worst, num / denom);
  }
  return 2.0 * worst;
}

GradBoundCurve yudovich_grad_bound(const YudovichReport& report, double eps_interp,
                                   double C_fit) {
  GradBoundCurve out;
  out.theta = theta_interpolation(eps_interp, report.delta);
  out.C_fit = C_fit;
  const double f_eps = (4.0 + 2.0 * eps_interp) / eps_interp;
  const double y0 = report.gradz.empty() ? 0.0 : report.gradz.front();
  std::size_t held = 0;
  for (std::size_t i = 0; i < report.t.size(); ++i) {
    const double b = std::pow(y0, out.theta) +
                     C_fit * out.theta * std::sqrt(f_eps) * report.Gtilde[i];
    out.bound.push_back(b);
    if (std::pow(report.gradz[i], out.theta) <= b * (1.0 + 1e-12) + 1e-300) ++held;
  }
  out.hold_fraction =
      report.t.empty() ? 0.0
                       : static_cast<double>(held) / static_cast<double>(report.t.size());
  return out;
}

double calibrate_grad_constant(const YudovichReport& report, double eps_interp) {
  const double theta = theta_interpolation(eps_interp, report.delta);
  const double f_eps = (4.0 + 2.0 * eps_interp) / eps_interp;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < report.t.size(); ++i) {
    const double dt = report.t[i + 1] - report.t[i];
    const double denom = theta * std::sqrt(f_eps) * dt * report.gtilde[i];
    if (denom < 1e-300) continue;
    const double num = std::pow(report.gradz[i + 1], theta) -
                       std::pow(report.gradz[i], theta);
    worst = std::max(worst, num / denom);
  }
  return 2.0 * worst;
}

LemmaReport lemma_integrability_check(const std::vector<SpectralField>& samples,
                                      double dt, double beta_plus, double gamma,
                                      const SeriesPolicy& policy) {
  if (!(gamma > 2.0 * beta_plus))
    throw ConfigError("lemma_integrability_check: requires gamma > 2*beta_plus");
  if (!(dt > 0.0)) throw UsageError("lemma_integrability_check: dt must be > 0");
  LemmaReport rep;
  rep.beta_plus = beta_plus;
  rep.gamma = gamma;
  rep.series_const = series_constant(beta_plus, gamma).value;

  double prev_sq = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    LemmaSample s;
    s.t = static_cast<double>(i) * dt;
    s.lhs = exp_h1_seminorm(samples[i], beta_plus);
    const double h_dot = h_functional(samples[i], gamma, policy, true).value;
    s.rhs = rep.series_const * std::sqrt(gamma) * std::sqrt(h_dot);
    if (s.rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, s.lhs / s.rhs);
    if (i > 0) rep.integral_lhs_sq += 0.5 * dt * (prev_sq + s.lhs * s.lhs);
    prev_sq = s.lhs * s.lhs;
    rep.samples.push_back(s);
  }
  return rep;
}

std::vector<LemmaRow> lemma_table() {
  return {
      {"gronwall", "y' <= f(t) y", "f locally integrable",
       "y(t) <= y(0) exp(int f); uniqueness for Lipschitz nonlinearities"},
      {"osgood", "y' <= f(t) w(y), int_0 dy/w(y) = inf", "w a modulus, w(0)=0",
       "y(0)=0 forces y=0; log-Lipschitz borderline cases"},
      {"yudovich", "y' <= h(lam) f(t) y^lam, lam -> 1^-",
       "sup over lam of the closed bound finite",
       "y(t) <= (y(0)^{2(1-lam)} + C sqrt(1-lam) int f)^{1/(1-lam)}; "
       "uniqueness when the lam -> 1 limit vanishes"},
  };
}

void write_report_csv(const YudovichReport& report,
                      const std::vector<BoundCurve>& bounds, std::ostream& os) {
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  os << "t,z,gradz,g,G";
  for (const auto& b : bounds) {
    std::snprintf(buf, sizeof(buf), "bound_%g", b.lambda);
    os << ',' << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i < report.t.size(); ++i) {
    put(report.t[i]);
    os << ',';
    put(report.z[i]);
    os << ',';
    put(report.gradz[i]);
    os << ',';
    put(report.g[i]);
    os << ',';
    put(report.G[i]);
    for (const auto& b : bounds) {
      os << ',';
      put(b.bound[i]);
    }
    os << '\n';
  }
}

}  // namespace mtnls
