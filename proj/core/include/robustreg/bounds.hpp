#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "robustreg/model.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/synthetic.hpp"

namespace robustreg {

/// Explicit constants of the high-probability excess-risk bounds.
/// eta is lambda * (variance factor); the admissible region is
/// 0 < eta_prime < 1 - eta.
struct PacBayesConstants {
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double H = std::numeric_limits<double>::quiet_NaN();
  double lambda = 0.0;
  double eta = 0.0;
  double eta_prime = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double V = 0.0;  // variance factor multiplying the rate
  double G = 1.0;  // prior-complexity growth constant

  /// the proof's inverse-temperature choices at sample size n
  double gamma(long n) const { return lambda * static_cast<double>(n) * eta_prime; }
  double gamma_star(long n) const { return lambda * static_cast<double>(n) * (1.0 + eta); }
};

/// Constants for the bounded-conditional-noise bound: eta = lambda (2 sigma + H)^2,
/// C1 = log((1+eta)^2 / (eta'(1-eta))) / (eta (1-eta-eta')), C2 = 2/(eta (1-eta-eta')).
/// The default tuning lambda = 0.32 (2 sigma + H)^-2, eta' = 0.18 gives
/// (C1, C2) = (16.6, 12.5) to three significant figures.
PacBayesConstants trunc_risk_constants(double sigma, double H, double lambda,
                                       double eta_prime = 0.18);

/// General variance-condition form: eta = lambda V and the complexity growth
/// constant G enters C1 = log(G (1+eta)^2 / (eta'(1-eta))) / (eta (1-eta-eta')).
PacBayesConstants variance_risk_constants(double V, double G, double lambda,
                                          double eta_prime = 0.18);

/// V (C1 D + C2 log(2/eps)) / n.  D is the complexity dimension: d in
/// general, d/2 when the box optimum is the unconstrained least-squares one.
double risk_bound(const PacBayesConstants& c, double D, double eps, long n);

/// Convenience wrappers building the constants inline.
double trunc_risk_bound(double sigma, double H, double lambda, double eta_prime, double D,
                        double eps, long n);
double variance_risk_bound(double V, double D, double G, double eps, long n, double lambda,
                           double eta_prime = 0.18);

/// Variance factor under a conditional noise bound: (2 sigma + H)^2.
double bounded_noise_variance_factor(double sigma, double H);

/// Closed-form moment inputs for the fourth-moment variance factor.
struct FourthMomentOracle {
  Eigen::MatrixXd gram;           // Q = E[phi phi^T]
  Eigen::MatrixXd weighted_gram;  // E[phi phi^T (Y - f*)^2]
  std::function<double(const Eigen::VectorXd&)> fourth_moment;  // E <theta, phi>^4
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fourth_moment_grad;
};

struct FourthMomentTerms {
  double weighted_sup = 0.0;   // sup of E[f^2 (Y-f*)^2] over the Q-unit sphere
  double diameter = 0.0;       // sqrt of sup over f', f'' of E[(f' - f'')^2]
  double kurtosis_sup = 0.0;   // sup of E[f^4] over the Q-unit sphere
  double value = 0.0;          // (2 sqrt(weighted_sup) + diameter * sqrt(kurtosis_sup))^2
  std::string caveat;          // the ascent piece is a lower bound up to restart coverage
};

/// Builds the closed-form oracle for a synthetic distribution, given the box
/// optimum's coordinates.  Throws when a required moment is infinite (e.g.
/// student-t noise with nu <= 4 lacks the fourth residual moment).
FourthMomentOracle make_fourth_moment_oracle(const DistributionSpec& spec,
                                             const Eigen::VectorXd& theta_star);

/// Variance factor from fourth-moment conditions.  Term 1 is the largest
/// generalized eigenvalue of (weighted_gram, gram); term 2 multiplies the
/// exact box diameter (corner enumeration of a convex quadratic) by the
/// kurtosis sup from projected-gradient ascent with random restarts.
FourthMomentTerms fourth_moment_variance_factor(const FourthMomentOracle& oracle,
                                                const ParamBox& box, int restarts = 32,
                                                std::uint64_t seed = 0);

/// Minimal admissible eta under an exponential-moment design condition:
/// eta = (lambda A^2 / (2 b1)) exp[M^2 exp(H b2 / A)], valid for
/// 0 < lambda <= 1/(2 A H).  usable is false when eta >= 1.
struct EtaResult {
  double eta = 0.0;
  bool usable = false;
};
EtaResult exp_moment_eta(double lambda, double A, double M, double H, double b1, double b2);

struct QuadratureConfig {
  int resolution = 256;       // midpoint nodes per axis (d <= 3)
  long mc_draws = 200000;     // fallback sample size for d > 3
  std::uint64_t seed = 1;
  double richardson_tol = 1e-4;  // allowed drift when the resolution doubles
};

/// J(beta) = -log of the box-average of exp(-beta * excess risk).
/// Midpoint quadrature with a doubled-resolution consistency check for
/// d <= 3; Monte Carlo with a reported standard error beyond.
double prior_complexity_potential(const RiskOracle& oracle, double beta,
                                  const QuadratureConfig& cfg = {}, double* mc_se = nullptr);

struct MarginReport {
  std::string name;    // which inequality was checked
  std::string params;  // JSON of the inputs
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  std::string note;

  double margin() const { return rhs - lhs; }
};

/// Prior-mass complexity check: J(beta) - J(alpha) <= D log(G beta / alpha),
/// within the quadrature/MC tolerance.  Requires 0 < alpha <= beta, G >= 1.
MarginReport check_prior_complexity(const RiskOracle& oracle, double alpha, double beta, double D,
                                    double G, const QuadratureConfig& cfg = {});

/// Centered log-Laplace bound for |V| <= b:
///   log E[exp(V - E V)] <= E[V^2] * (exp(b) - 1 - b)/b^2.
struct BoundedNoiseFixture {
  enum class Kind { TwoPoint, Uniform };
  Kind kind = Kind::TwoPoint;
  double b = 1.0;  // essential bound; TwoPoint is +-b, Uniform is [-b, b]

  double second_moment() const;
  double sample(Rng& rng) const;
};
MarginReport check_log_laplace_bounded(const BoundedNoiseFixture& fixture, long draws,
                                       std::uint64_t seed);

/// Exponential-moment fixture V = c * Laplace(1) with E exp|V| = 1/(1 - c).
struct ExpMomentFixture {
  double c = 0.0;  // in [0, 1)

  double exp_moment() const;
  double sample(Rng& rng) const;
};
/// log E[exp(alpha (V - E V))] <= alpha^2 M^2 / (2 sqrt(pi) (1 - |alpha|)).
MarginReport check_log_laplace_exp_moment(const ExpMomentFixture& fixture, double alpha,
                                          long draws, std::uint64_t seed);
/// |E V| <= log M.
MarginReport check_exp_moment_mean(const ExpMomentFixture& fixture, long draws,
                                   std::uint64_t seed);

/// (exp(u) - 1 - u) / u^2, extended by continuity to 1/2 at u = 0.
double expm1_ratio(double u);

/// Named verification suites runnable from the command line; "all" runs
/// every suite in a fixed order.
std::vector<std::string> verify_suites();
std::vector<MarginReport> verify_battery(const std::string& suite, std::uint64_t seed = 1);

}  // namespace robustreg
