#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mtnls/dynamics.hpp"

namespace mtnls {

// Twin-trajectory divergence record. z(t) = |u1-u2|_{L2},
// g = (1 + |u1|_{Hdot1} + |u2|_{Hdot1}) (|e^{b+|u1|^2}-1|_{Hdot1} + same for u2),
// G its cumulative trapezoid integral. gtilde/Gtilde are the gradient-level
// analogues driven by the difference's W^{1,2+delta} norm.
struct YudovichReport {
  double eps = 0.0;
  double beta_plus = 0.0;
  double delta = 0.0;
  std::vector<double> t;
  std::vector<double> z;
  std::vector<double> gradz;
  std::vector<double> g;
  std::vector<double> G;
  std::vector<double> gtilde;
  std::vector<double> Gtilde;
  double sup_diff_l2 = 0.0;
  double sup_diff_h1 = 0.0;
};

std::vector<YudovichReport> divergence_experiment(const SpectralField& u0,
                                                  const SpectralField& phi,
                                                  const std::vector<double>& eps_list,
                                                  double T,
                                                  const StepperConfig& config,
                                                  const ModelParams& params,
                                                  double beta_plus);

// B_lambda(t) = (z(0)^{2(1-lambda)} + C3 sqrt(1-lambda) G(t))^{1/(1-lambda)}
struct BoundCurve {
  double lambda = 0.0;
  double C3 = 0.0;
  std::vector<double> bound;     // aligned to report.t
  double hold_fraction = 0.0;    // fraction of steps with z^2 <= bound
};

BoundCurve yudovich_bound(const YudovichReport& report, double lambda, double C3_fit);

// 2x the largest discrete ratio (d(z^2)/dt) / (z^{2 lambda} g); 0 on a
// identically-zero difference
double calibrate_c3(const YudovichReport& report, double lambda);

// gradient-level envelope: gradz(t)^theta <= gradz(0)^theta
//                          + C_fit theta sqrt(f(eps)) Gtilde(t),
// theta = theta_interpolation(eps_interp, delta), f(eps) = (4+2 eps)/eps
struct GradBoundCurve {
  double theta = 0.0;
  double C_fit = 0.0;
  std::vector<double> bound;  // on gradz^theta
  double hold_fraction = 0.0;
};

GradBoundCurve yudovich_grad_bound(const YudovichReport& report, double eps_interp,
                                   double C_fit);
double calibrate_grad_constant(const YudovichReport& report, double eps_interp);

struct LemmaSample {
  double t = 0.0;
  double lhs = 0.0;  // exp_h1_seminorm(u, beta_plus)
  double rhs = 0.0;  // series_constant(beta_plus, gamma) sqrt(gamma h_dot(u, gamma))
};

struct LemmaReport {
  double beta_plus = 0.0;
  double gamma = 0.0;
  double series_const = 0.0;
  double integral_lhs_sq = 0.0;  // trapezoid of lhs^2 over the samples
  double worst_ratio = 0.0;      // max lhs/rhs over samples with rhs > 0
  std::vector<LemmaSample> samples;
};

LemmaReport lemma_integrability_check(const std::vector<SpectralField>& samples,
                                      double dt, double beta_plus, double gamma,
                                      const SeriesPolicy& policy);

struct LemmaRow {
  std::string lemma;
  std::string estimate;
  std::string condition;
  std::string conclusion;
};

// three-row comparison of the scalar comparison lemmas behind uniqueness
std::vector<LemmaRow> lemma_table();

// CSV: t,z,gradz,g,G,bound_<lambda>... one column per supplied curve
void write_report_csv(const YudovichReport& report,
                      const std::vector<BoundCurve>& bounds, std::ostream& os);

}  // namespace mtnls
