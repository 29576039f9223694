#include "robustreg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "robustreg/kvconfig.hpp"
#include "robustreg/truncation.hpp"

namespace robustreg {
namespace {

using json = nlohmann::ordered_json;

void check_tuning(double eta, double eta_prime) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("risk constants: need eta = lambda * V in (0, 1)");
  if (!(eta_prime > 0.0) || !(eta_prime < 1.0 - eta))
    throw std::invalid_argument("risk constants: need eta_prime in (0, 1 - eta)");
}

PacBayesConstants build_constants(double V, double G, double lambda, double eta_prime) {
  if (!(lambda > 0.0)) throw std::invalid_argument("risk constants: lambda must be positive");
  if (!(V > 0.0)) throw std::invalid_argument("risk constants: variance factor must be positive");
  if (!(G >= 1.0)) throw std::invalid_argument("risk constants: complexity growth G must be >= 1");
  const double eta = lambda * V;
  check_tuning(eta, eta_prime);
  PacBayesConstants c;
  c.lambda = lambda;
  c.eta = eta;
  c.eta_prime = eta_prime;
  c.V = V;
  c.G = G;
  const double denom = eta * (1.0 - eta - eta_prime);
  c.C1 = std::log(G * (1.0 + eta) * (1.0 + eta) / (eta_prime * (1.0 - eta))) / denom;
  c.C2 = 2.0 / denom;
  return c;
}

}  // namespace

PacBayesConstants trunc_risk_constants(double sigma, double H, double lambda, double eta_prime) {
  if (!(sigma >= 0.0) || !(H >= 0.0))
    throw std::invalid_argument("risk constants: sigma and H must be nonnegative");
  const double span = 2.0 * sigma + H;
  PacBayesConstants c = build_constants(span * span, 1.0, lambda, eta_prime);
  c.sigma = sigma;
  c.H = H;
  return c;
}

PacBayesConstants variance_risk_constants(double V, double G, double lambda, double eta_prime) {
  return build_constants(V, G, lambda, eta_prime);
}

double risk_bound(const PacBayesConstants& c, double D, double eps, long n) {
  if (!(D >= 0.0)) throw std::invalid_argument("risk_bound: D must be nonnegative");
  if (!(eps > 0.0) || !(eps < 1.0)) throw std::invalid_argument("risk_bound: eps must be in (0, 1)");
  if (n < 1) throw std::invalid_argument("risk_bound: n must be positive");
  return c.V * (c.C1 * D + c.C2 * std::log(2.0 / eps)) / static_cast<double>(n);
}

double trunc_risk_bound(double sigma, double H, double lambda, double eta_prime, double D,
                        double eps, long n) {
  return risk_bound(trunc_risk_constants(sigma, H, lambda, eta_prime), D, eps, n);
}

double variance_risk_bound(double V, double D, double G, double eps, long n, double lambda,
                           double eta_prime) {
  return risk_bound(variance_risk_constants(V, G, lambda, eta_prime), D, eps, n);
}

double bounded_noise_variance_factor(double sigma, double H) {
  if (!(sigma >= 0.0) || !(H >= 0.0))
    throw std::invalid_argument("bounded_noise_variance_factor: sigma, H must be nonnegative");
  const double span = 2.0 * sigma + H;
  return span * span;
}

FourthMomentOracle make_fourth_moment_oracle(const DistributionSpec& spec,
                                             const Eigen::VectorXd& theta_star) {
  FourthMomentOracle o;
  o.gram = spec.gram();
  const int d = static_cast<int>(o.gram.rows());
  if (theta_star.size() != d)
    throw std::invalid_argument("make_fourth_moment_oracle: theta_star dimension mismatch");

  const bool has_noise = spec.variant() != DistributionSpec::Variant::Hypercube;
  if (has_noise && spec.noise().kind == NoiseKind::StudentT && spec.noise().nu <= 4.0)
    throw std::domain_error(
        "make_fourth_moment_oracle: E[(Y - f*)^4] is infinite for student-t noise with "
        "nu <= 4; the fourth-moment variance factor needs a finite fourth residual moment");

  switch (spec.variant()) {
    case DistributionSpec::Variant::GaussianDesign: {
      if (spec.quad_coeff() != 0.0)
        throw std::domain_error(
            "make_fourth_moment_oracle: closed-form weighted moments require a linear "
            "regression function (quadratic distortion term present)");
      const Eigen::MatrixXd Sigma = o.gram;
      const Eigen::VectorXd delta = spec.design_coef() - theta_star;
      const Eigen::VectorXd sd = Sigma * delta;
      const double nv = spec.noise().variance();
      o.weighted_gram = Sigma * (delta.dot(sd) + nv) + 2.0 * sd * sd.transpose();
      o.fourth_moment = [Sigma](const Eigen::VectorXd& t) {
        const double q = t.dot(Sigma * t);
        return 3.0 * q * q;
      };
      o.fourth_moment_grad = [Sigma](const Eigen::VectorXd& t) {
        return Eigen::VectorXd(12.0 * t.dot(Sigma * t) * (Sigma * t));
      };
      break;
    }
    case DistributionSpec::Variant::PartitionDesign: {
      const Eigen::VectorXd p = spec.cell_probs();
      const Eigen::VectorXd s = spec.feature_map().sup_bounds();
      const double nv = spec.noise().variance();
      const double loc = spec.location();
      Eigen::VectorXd diag(d), quart(d);
      for (int j = 0; j < d; ++j) {
        const double gap = loc - theta_star[j] * s[j];
        diag[j] = p[j] * s[j] * s[j] * (gap * gap + nv);
        quart[j] = p[j] * std::pow(s[j], 4);
      }
      o.weighted_gram = diag.asDiagonal();
      o.fourth_moment = [quart](const Eigen::VectorXd& t) {
        return (quart.array() * t.array().pow(4)).sum();
      };
      o.fourth_moment_grad = [quart](const Eigen::VectorXd& t) {
        return Eigen::VectorXd(4.0 * quart.array() * t.array().cube());
      };
      break;
    }
    case DistributionSpec::Variant::Hypercube: {
      const double beta = spec.hypercube_beta();
      const double sgn = static_cast<double>(spec.hypercube_sign());
      const double v0 = theta_star[0];
      const double v1 = theta_star[1];
      Eigen::VectorXd diag(2), quart(2);
      diag << (1.0 - beta) * v0 * v0, 1.0 - 2.0 * beta * sgn * v1 + beta * v1 * v1;
      quart << 1.0 - beta, beta;
      o.weighted_gram = diag.asDiagonal();
      o.fourth_moment = [quart](const Eigen::VectorXd& t) {
        return (quart.array() * t.array().pow(4)).sum();
      };
      o.fourth_moment_grad = [quart](const Eigen::VectorXd& t) {
        return Eigen::VectorXd(4.0 * quart.array() * t.array().cube());
      };
      break;
    }
  }
  return o;
}

FourthMomentTerms fourth_moment_variance_factor(const FourthMomentOracle& oracle,
                                                const ParamBox& box, int restarts,
                                                std::uint64_t seed) {
  const int d = box.dim();
  if (oracle.gram.rows() != d || oracle.gram.cols() != d ||
      oracle.weighted_gram.rows() != d || oracle.weighted_gram.cols() != d)
    throw std::invalid_argument("fourth_moment_variance_factor: moment matrices must match the box");
  if (!oracle.fourth_moment || !oracle.fourth_moment_grad)
    throw std::logic_error("fourth_moment_variance_factor: fourth-moment oracle not provided");
  if (restarts < 1) throw std::invalid_argument("fourth_moment_variance_factor: need restarts >= 1");
  if (d > 30)
    throw std::invalid_argument("fourth_moment_variance_factor: corner enumeration limited to d <= 30");

  // Term 1: sup of the Rayleigh quotient theta^T M theta / theta^T Q theta,
  // i.e. the top eigenvalue after the symmetric whitening Q^{-1/2} M Q^{-1/2}.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle.gram);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(ev.maxCoeff(), 0.0)))
    throw std::runtime_error(
        "fourth_moment_variance_factor: Gram matrix is singular; the whitened reduction "
        "needs a full-rank design");
  const Eigen::MatrixXd whiten =
      es.eigenvectors() * ev.cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Eigen::MatrixXd B = whiten * oracle.weighted_gram * whiten;
  B = 0.5 * (B + B.transpose()).eval();
  const double term1 = std::max(0.0, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(B)
                                         .eigenvalues()
                                         .maxCoeff());

  // Class diameter: the quadratic Delta^T Q Delta is convex, so its maximum
  // over the difference box lies at a corner.
  const Eigen::VectorXd w = box.widths();
  double corner_max = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    Eigen::VectorXd delta(d);
    for (int k = 0; k < d; ++k) delta[k] = ((mask >> k) & 1u) ? w[k] : -w[k];
    corner_max = std::max(corner_max, delta.dot(oracle.gram * delta));
  }

  // Kurtosis sup over the Q-unit sphere: multi-start projected-gradient
  // ascent in whitened coordinates (theta = Q^{-1/2} u, |u| = 1).
  Rng rng(seed);
  const auto value_at = [&](const Eigen::VectorXd& u) { return oracle.fourth_moment(whiten * u); };
  double best = 0.0;
  Eigen::VectorXd u(d);
  for (int r = 0; r < restarts + d; ++r) {
    if (r < d) {
      u = Eigen::VectorXd::Unit(d, r);
    } else {
      for (int k = 0; k < d; ++k) u[k] = rng.gaussian();
      if (u.norm() == 0.0) continue;
      u.normalize();
    }
    double val = value_at(u);
    double step = 0.5;
    for (int it = 0; it < 500; ++it) {
      const Eigen::VectorXd g = whiten * oracle.fourth_moment_grad(whiten * u);
      const Eigen::VectorXd tangent = g - g.dot(u) * u;
      if (tangent.norm() <= 1e-13 * std::max(1.0, std::abs(val))) break;
      Eigen::VectorXd cand;
      double cval = val;
      int backtracks = 0;
      while (step >= 1e-16) {
        cand = (u + step * tangent).normalized();
        cval = value_at(cand);
        if (cval > val) break;
        step *= 0.5;
        ++backtracks;
      }
      if (!(cval > val)) break;
      u = cand;
      val = cval;
      if (backtracks == 0) step *= 1.5;
    }
    best = std::max(best, val);
  }

  FourthMomentTerms out;
  out.weighted_sup = term1;
  out.diameter = std::sqrt(corner_max);
  out.kurtosis_sup = best;
  const double root = 2.0 * std::sqrt(term1) + out.diameter * std::sqrt(best);
  out.value = root * root;
  out.caveat =
      "kurtosis sup obtained by multi-start ascent; the reported factor is exact up to "
      "restart coverage";
  return out;
}

EtaResult exp_moment_eta(double lambda, double A, double M, double H, double b1, double b2) {
  if (!(A > 0.0) || !(b1 > 0.0) || !(b2 >= 0.0) || !(M >= 0.0) || !(H >= 0.0))
    throw std::invalid_argument("exp_moment_eta: need A, b1 > 0 and M, H, b2 >= 0");
  if (!(lambda > 0.0) || (H > 0.0 && lambda > 1.0 / (2.0 * A * H)))
    throw std::invalid_argument("exp_moment_eta: need 0 < lambda <= 1/(2 A H)");
  EtaResult r;
  r.eta = lambda * A * A / (2.0 * b1) * std::exp(M * M * std::exp(H * b2 / A));
  r.usable = r.eta < 1.0;
  return r;
}

namespace {

// Box-average of exp(-beta * excess) via midpoint nodes; the integrand lies
// in (0, 1], so plain accumulation is stable.
double midpoint_mean_exp(const RiskOracle& oracle, double beta, int res) {
  const int d = oracle.box.dim();
  long cells = 1;
  for (int k = 0; k < d; ++k) {
    cells *= res;
    if (cells > 50'000'000L)
      throw std::invalid_argument("prior_complexity_potential: quadrature grid too large");
  }
  const Eigen::VectorXd w = oracle.box.widths();
  Eigen::VectorXd node(d);
  double sum = 0.0;
  for (long c = 0; c < cells; ++c) {
    long rest = c;
    for (int k = d - 1; k >= 0; --k) {
      const long idx = rest % res;
      rest /= res;
      node[k] = oracle.box.lo[k] + (idx + 0.5) * w[k] / res;
    }
    sum += std::exp(-beta * oracle.excess(node));
  }
  return sum / static_cast<double>(cells);
}

}  // namespace

double prior_complexity_potential(const RiskOracle& oracle, double beta,
                                  const QuadratureConfig& cfg, double* mc_se) {
  if (!(beta >= 0.0)) throw std::invalid_argument("prior_complexity_potential: beta must be >= 0");
  if (cfg.resolution < 2) throw std::invalid_argument("prior_complexity_potential: resolution too small");
  if (mc_se) *mc_se = 0.0;
  const int d = oracle.box.dim();
  if (d <= 3) {
    // Double the per-axis resolution until two successive grids agree; the
    // midpoint rule is O(h^2), so a few doublings suffice for smooth
    // integrands.  The grid-size cap inside midpoint_mean_exp bounds the work.
    int res = cfg.resolution;
    double coarse = -std::log(midpoint_mean_exp(oracle, beta, res));
    for (int iter = 0; iter < 8; ++iter) {
      double fine = 0.0;
      try {
        fine = -std::log(midpoint_mean_exp(oracle, beta, 2 * res));
      } catch (const std::invalid_argument&) {
        break;  // next doubling would exceed the grid cap
      }
      if (std::abs(coarse - fine) <= cfg.richardson_tol) return fine;
      res *= 2;
      coarse = fine;
    }
    throw std::runtime_error(
        "prior_complexity_potential: midpoint quadrature cannot reach the doubling tolerance "
        "within the grid-size cap; loosen richardson_tol");
  }
  if (cfg.mc_draws < 2) throw std::invalid_argument("prior_complexity_potential: too few MC draws");
  Rng rng(cfg.seed);
  const Eigen::VectorXd w = oracle.box.widths();
  Eigen::VectorXd node(d);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < cfg.mc_draws; ++i) {
    for (int k = 0; k < d; ++k) node[k] = oracle.box.lo[k] + w[k] * rng.uniform();
    const double v = std::exp(-beta * oracle.excess(node));
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(cfg.mc_draws);
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean) * n / (n - 1.0);
  if (mc_se) *mc_se = std::sqrt(var / n) / mean;  // delta method for -log(mean)
  return -std::log(mean);
}

MarginReport check_prior_complexity(const RiskOracle& oracle, double alpha, double beta, double D,
                                    double G, const QuadratureConfig& cfg) {
  if (!(alpha > 0.0) || !(beta >= alpha))
    throw std::invalid_argument("check_prior_complexity: need 0 < alpha <= beta");
  if (!(D >= 0.0) || !(G >= 1.0))
    throw std::invalid_argument("check_prior_complexity: need D >= 0 and G >= 1");
  double se_a = 0.0, se_b = 0.0;
  const double ja = prior_complexity_potential(oracle, alpha, cfg, &se_a);
  const double jb = prior_complexity_potential(oracle, beta, cfg, &se_b);
  MarginReport r;
  r.name = "prior-mass-complexity";
  json p;
  p["alpha"] = alpha;
  p["beta"] = beta;
  p["D"] = D;
  p["G"] = G;
  p["dim"] = oracle.box.dim();
  r.params = p.dump();
  r.lhs = jb - ja;
  r.rhs = D * std::log(G * beta / alpha);
  const double tol = 2.0 * cfg.richardson_tol + 3.0 * (se_a + se_b);
  r.pass = r.lhs <= r.rhs + tol;
  r.note = "tolerance " + kv_from_double(tol);
  return r;
}

double BoundedNoiseFixture::second_moment() const {
  return kind == Kind::TwoPoint ? b * b : b * b / 3.0;
}

double BoundedNoiseFixture::sample(Rng& rng) const {
  if (kind == Kind::TwoPoint) return rng.bernoulli(0.5) ? b : -b;
  return rng.uniform(-b, b);
}

double ExpMomentFixture::exp_moment() const {
  if (!(c >= 0.0) || !(c < 1.0))
    throw std::invalid_argument("ExpMomentFixture: need c in [0, 1)");
  return 1.0 / (1.0 - c);
}

double ExpMomentFixture::sample(Rng& rng) const {
  const double mag = -std::log(rng.uniform_pos());  // Exp(1)
  return (rng.bernoulli(0.5) ? c : -c) * mag;
}

namespace {

struct McLogMean {
  double log_mean = 0.0;
  double se = 0.0;  // standard error of log_mean (delta method)
};

template <typename Draw>
McLogMean mc_log_mean(long draws, Draw&& draw) {
  if (draws < 2) throw std::invalid_argument("mc check: need at least two draws");
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double v = draw();
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean) * n / (n - 1.0);
  McLogMean out;
  out.log_mean = std::log(mean);
  out.se = std::sqrt(var / n) / mean;
  return out;
}

}  // namespace

double expm1_ratio(double u) {
  if (std::abs(u) < 1e-4) return 0.5 + u / 6.0 + u * u / 24.0;
  return (std::expm1(u) - u) / (u * u);
}

MarginReport check_log_laplace_bounded(const BoundedNoiseFixture& fixture, long draws,
                                       std::uint64_t seed) {
  if (!(fixture.b >= 0.0)) throw std::invalid_argument("check_log_laplace_bounded: need b >= 0");
  Rng rng(seed);
  // Both fixtures are symmetric, so E V = 0 and the centered and raw
  // exponential moments coincide.
  const McLogMean mc = mc_log_mean(draws, [&] { return std::exp(fixture.sample(rng)); });
  MarginReport r;
  r.name = "log-laplace-bounded";
  json p;
  p["kind"] = fixture.kind == BoundedNoiseFixture::Kind::TwoPoint ? "two-point" : "uniform";
  p["b"] = fixture.b;
  p["draws"] = draws;
  r.params = p.dump();
  r.lhs = mc.log_mean;
  r.rhs = fixture.second_moment() * expm1_ratio(fixture.b);
  r.pass = r.lhs <= r.rhs + 3.0 * mc.se;
  r.note = "mc se " + kv_from_double(mc.se);
  return r;
}

MarginReport check_log_laplace_exp_moment(const ExpMomentFixture& fixture, double alpha,
                                          long draws, std::uint64_t seed) {
  if (!(std::abs(alpha) < 1.0))
    throw std::invalid_argument("check_log_laplace_exp_moment: need |alpha| < 1");
  const double M = fixture.exp_moment();
  Rng rng(seed);
  const McLogMean mc =
      mc_log_mean(draws, [&] { return std::exp(alpha * fixture.sample(rng)); });
  MarginReport r;
  r.name = "log-laplace-exp-moment";
  json p;
  p["c"] = fixture.c;
  p["M"] = M;
  p["alpha"] = alpha;
  p["draws"] = draws;
  r.params = p.dump();
  r.lhs = mc.log_mean;
  r.rhs = alpha * alpha * M * M / (2.0 * std::sqrt(std::numbers::pi) * (1.0 - std::abs(alpha)));
  r.pass = r.lhs <= r.rhs + 3.0 * mc.se;
  r.note = "mc se " + kv_from_double(mc.se);
  return r;
}

MarginReport check_exp_moment_mean(const ExpMomentFixture& fixture, long draws,
                                   std::uint64_t seed) {
  const double M = fixture.exp_moment();
  if (draws < 2) throw std::invalid_argument("check_exp_moment_mean: need at least two draws");
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (long i = 0; i < draws; ++i) {
    const double v = fixture.sample(rng);
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, sumsq / n - mean * mean) * n / (n - 1.0);
  const double se = std::sqrt(var / n);
  MarginReport r;
  r.name = "exp-moment-mean";
  json p;
  p["c"] = fixture.c;
  p["M"] = M;
  p["draws"] = draws;
  r.params = p.dump();
  r.lhs = std::abs(mean);
  r.rhs = std::log(M);
  r.pass = r.lhs <= r.rhs + 3.0 * se;
  r.note = "mc se " + kv_from_double(se);
  return r;
}

namespace {

MarginReport abs_error_report(std::string name, const json& params, double value, double target,
                              double tol) {
  MarginReport r;
  r.name = std::move(name);
  r.params = params.dump();
  r.lhs = std::abs(value - target);
  r.rhs = tol;
  r.pass = r.lhs <= r.rhs;
  return r;
}

RiskOracle quadratic_oracle(Eigen::MatrixXd Q, Eigen::VectorXd b, double c0, ParamBox box) {
  RiskOracle o;
  o.Q = std::move(Q);
  o.b = std::move(b);
  o.c0 = c0;
  o.box = std::move(box);
  o.theta_star = constrained_argmin_quadratic(o.Q, o.b, o.box, 1e-12);
  o.risk_star = o.risk(o.theta_star);
  return o;
}

std::vector<MarginReport> truncation_suite() {
  std::vector<MarginReport> out;
  const int points = 160001;
  double max_rel = 0.0, max_t = -1e300, min_exp = 1e300, max_mirror = 0.0, max_lin = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -80.0 + 160.0 * i / (points - 1);
    const double t = soft_trunc(x);
    const double product = std::exp(soft_trunc_mirror(x) - t);
    const double target = 1.0 + 0.25 * x * x * x * x;
    max_rel = std::max(max_rel, std::abs(product - target) / target);
    max_t = std::max(max_t, t);
    min_exp = std::min(min_exp, std::exp(-t));
    max_mirror = std::max(max_mirror, std::abs(soft_trunc_mirror(x) + soft_trunc(-x)));
    if (std::abs(x) <= 0.5 && x != 0.0)
      max_lin = std::max(max_lin, std::abs(t - x) / std::abs(x * x * x));
  }
  json p;
  p["grid"] = "[-80, 80], 160001 points";
  out.push_back(abs_error_report("soft-trunc-product-identity", p, max_rel, 0.0, 1e-12));
  {
    MarginReport r;
    r.name = "soft-trunc-floor";
    r.params = p.dump();
    r.lhs = 0.5;
    r.rhs = min_exp;
    r.pass = r.lhs <= r.rhs;
    r.note = "exp(-T(x)) >= 1/2, tight at x = 1";
    out.push_back(r);
  }
  {
    MarginReport r;
    r.name = "soft-trunc-cap";
    r.params = p.dump();
    r.lhs = max_t;
    r.rhs = std::log(2.0);
    r.pass = r.lhs <= r.rhs;
    r.note = "T(x) <= log 2, tight at x = 1";
    out.push_back(r);
  }
  out.push_back(abs_error_report("soft-trunc-mirror-antisymmetry", p, max_mirror, 0.0, 0.0));
  {
    MarginReport r;
    r.name = "soft-trunc-linearization";
    r.params = p.dump();
    r.lhs = max_lin;
    r.rhs = 0.25;
    r.pass = r.lhs <= r.rhs;
    r.note = "|T(x) - x| <= |x|^3 / 4 near zero";
    out.push_back(r);
  }
  return out;
}

std::vector<MarginReport> constants_suite() {
  std::vector<MarginReport> out;
  const double sigma = 1.0, H = 1.0;
  const double span = 2.0 * sigma + H;
  const double lambda = 0.32 / (span * span);
  const PacBayesConstants c = trunc_risk_constants(sigma, H, lambda, 0.18);
  json p;
  p["sigma"] = sigma;
  p["H"] = H;
  p["lambda"] = lambda;
  p["eta_prime"] = 0.18;
  out.push_back(abs_error_report("default-tuning-c1", p, c.C1, 16.598277388127944, 1e-12));
  out.push_back(abs_error_report("default-tuning-c2", p, c.C2, 12.5, 1e-12));
  out.push_back(
      abs_error_report("default-tuning-c1-half", p, 0.5 * c.C1, 8.299138694063972, 1e-12));

  {
    const double s2 = 0.3, H2 = 0.9, lam = 0.1;
    const double V = bounded_noise_variance_factor(s2, H2);
    const double bt = trunc_risk_bound(s2, H2, lam, 0.18, 3.0, 0.05, 500);
    const double bv = variance_risk_bound(V, 3.0, 1.0, 0.05, 500, lam, 0.18);
    json q;
    q["sigma"] = s2;
    q["H"] = H2;
    q["lambda"] = lam;
    out.push_back(abs_error_report("variance-form-collapse", q, bt, bv, 1e-12));
  }
  {
    const double V = 2.25, lam = 0.1, ep = 0.18, D = 2.0;
    const long n = 400;
    const double eta = lam * V;
    const double diff = variance_risk_bound(V, D, 3.0, 0.05, n, lam, ep) -
                        variance_risk_bound(V, D, 1.5, 0.05, n, lam, ep);
    const double expected = V * D * std::log(2.0) / (eta * (1.0 - eta - ep)) / n;
    json q;
    q["V"] = V;
    q["lambda"] = lam;
    q["D"] = D;
    q["n"] = n;
    out.push_back(abs_error_report("complexity-log-additivity", q, diff, expected, 1e-12));
  }
  {
    // C1 stays positive and finite inside the admissible region and diverges
    // approaching eta + eta_prime = 1.
    double min_c1 = 1e300;
    bool finite = true;
    for (double eta : {0.05, 0.2, 0.4, 0.6, 0.8}) {
      for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double ep = frac * (1.0 - eta);
        const PacBayesConstants g = variance_risk_constants(1.0, 1.0, eta, ep);
        finite = finite && std::isfinite(g.C1) && std::isfinite(g.C2);
        min_c1 = std::min(min_c1, std::min(g.C1, g.C2));
      }
    }
    MarginReport r;
    r.name = "admissible-grid-positive";
    r.params = "{\"grid\":\"eta x eta_prime, 25 points\"}";
    r.lhs = 0.0;
    r.rhs = finite ? min_c1 : -1.0;
    r.pass = finite && r.lhs < r.rhs;
    out.push_back(r);

    const double near = trunc_risk_constants(1.0, 1.0, lambda, (1.0 - 0.32) - 1e-9).C1;
    MarginReport dv;
    dv.name = "boundary-divergence";
    dv.params = "{\"eta\":0.32,\"eta_prime\":\"1 - eta - 1e-9\"}";
    dv.lhs = 1e6 * c.C1;
    dv.rhs = near;
    dv.pass = dv.lhs <= dv.rhs;
    dv.note = "C1 blows up approaching the admissibility boundary";
    out.push_back(dv);
  }
  {
    const EtaResult e = exp_moment_eta(0.1, 1.0, 1.0, 1.0, 2.0, 2.0);
    json q;
    q["lambda"] = 0.1;
    q["A"] = 1.0;
    q["M"] = 1.0;
    q["H"] = 1.0;
    q["b1"] = 2.0;
    q["b2"] = 2.0;
    out.push_back(
        abs_error_report("exp-moment-eta-example", q, e.eta, 40.45444979781635, 1e-9));
    MarginReport r;
    r.name = "exp-moment-eta-unusable";
    r.params = q.dump();
    r.lhs = 1.0;
    r.rhs = e.eta;
    r.pass = !e.usable && r.lhs <= r.rhs;
    r.note = "the admissible eta exceeds 1, so the condition is reported unusable";
    out.push_back(r);
  }
  return out;
}

std::vector<MarginReport> complexity_suite() {
  std::vector<MarginReport> out;
  struct Fixture {
    const char* label;
    RiskOracle oracle;
    double D;
    double G;
  };
  std::vector<Fixture> fixtures;
  {
    Eigen::MatrixXd Q(1, 1);
    Q << 1.0;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(1);
    fixtures.push_back({"interior-1d",
                        quadratic_oracle(Q, b, 1.0, ParamBox{-Eigen::VectorXd::Ones(1),
                                                             Eigen::VectorXd::Ones(1)}),
                        0.5, 1.0});
  }
  {
    Eigen::MatrixXd Q(1, 1);
    Q << 1.0;
    Eigen::VectorXd b(1);
    b << 1.5;  // unconstrained optimum outside the box -> boundary optimum
    fixtures.push_back({"boundary-1d",
                        quadratic_oracle(Q, b, 3.0, ParamBox{-Eigen::VectorXd::Ones(1),
                                                             Eigen::VectorXd::Ones(1)}),
                        1.0, 1.0});
  }
  {
    Eigen::MatrixXd Q(2, 2);
    Q << 1.0, 0.2, 0.2, 2.0;
    Eigen::VectorXd b(2);
    b << 0.1, -0.1;
    fixtures.push_back({"interior-2d",
                        quadratic_oracle(Q, b, 1.0, ParamBox{-Eigen::VectorXd::Ones(2),
                                                             Eigen::VectorXd::Ones(2)}),
                        1.0, 1.0});
  }
  {
    Eigen::MatrixXd Q(2, 2);
    Q << 1.0, 0.0, 0.0, 0.5;
    Eigen::VectorXd b(2);
    b << 1.5, 0.2;
    fixtures.push_back({"boundary-2d",
                        quadratic_oracle(Q, b, 4.0, ParamBox{-Eigen::VectorXd::Ones(2),
                                                             Eigen::VectorXd::Ones(2)}),
                        2.0, 1.0});
  }
  const double levels[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (const Fixture& f : fixtures) {
    for (double alpha : levels) {
      for (double beta : levels) {
        if (beta < alpha) continue;
        MarginReport r = check_prior_complexity(f.oracle, alpha, beta, f.D, f.G);
        r.name = std::string("prior-mass-complexity[") + f.label + "]";
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<MarginReport> log_laplace_suite(std::uint64_t seed) {
  std::vector<MarginReport> out;
  out.push_back(check_log_laplace_bounded(
      BoundedNoiseFixture{BoundedNoiseFixture::Kind::TwoPoint, 0.0}, 100000, seed + 1));
  {
    // Closed-form instance of the same inequality: log cosh(1) <= e - 2.
    MarginReport r;
    r.name = "log-laplace-bounded-closed-form";
    r.params = "{\"kind\":\"two-point\",\"b\":1.0}";
    r.lhs = std::log(std::cosh(1.0));
    r.rhs = std::exp(1.0) - 2.0;
    r.pass = r.lhs <= r.rhs;
    out.push_back(r);
  }
  out.push_back(check_log_laplace_bounded(
      BoundedNoiseFixture{BoundedNoiseFixture::Kind::TwoPoint, 1.0}, 1000000, seed + 2));
  out.push_back(check_log_laplace_bounded(
      BoundedNoiseFixture{BoundedNoiseFixture::Kind::Uniform, 0.5}, 1000000, seed + 3));

  out.push_back(check_exp_moment_mean(ExpMomentFixture{0.0}, 100000, seed + 4));
  const ExpMomentFixture laplace{2.0 / 3.0};  // E exp|V| = 3
  out.push_back(check_exp_moment_mean(laplace, 1000000, seed + 5));
  out.push_back(check_log_laplace_exp_moment(laplace, 0.0, 100000, seed + 6));
  for (double alpha : {0.25, 0.5, 0.75})
    out.push_back(check_log_laplace_exp_moment(laplace, alpha, 1000000,
                                               seed + 7 + static_cast<std::uint64_t>(alpha * 100)));
  return out;
}

std::vector<MarginReport> variance_suite(std::uint64_t seed) {
  std::vector<MarginReport> out;
  const struct {
    double sigma, H, expected;
  } trivials[] = {{0.0, 1.0, 1.0}, {1.0, 0.0, 4.0}, {1.0, 2.0, 16.0}};
  for (const auto& t : trivials) {
    json p;
    p["sigma"] = t.sigma;
    p["H"] = t.H;
    out.push_back(abs_error_report("bounded-noise-factor", p,
                                   bounded_noise_variance_factor(t.sigma, t.H), t.expected,
                                   1e-15));
  }
  {
    // One-dimensional collapse: both sups are available in closed form.
    Eigen::MatrixXd Sigma(1, 1);
    Sigma << 1.0;
    Eigen::VectorXd theta0(1);
    theta0 << 0.3;
    const ParamBox box{-Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
    const DistributionSpec spec =
        DistributionSpec::gaussian_design(Sigma, theta0, NoiseSpec::gaussian(0.5), box);
    const FourthMomentOracle oracle = make_fourth_moment_oracle(spec, theta0);
    const FourthMomentTerms terms = fourth_moment_variance_factor(oracle, box, 32, seed);
    const double direct =
        std::pow(2.0 * std::sqrt(0.25) + 2.0 * std::sqrt(3.0), 2.0);  // (2 sqrt(M/Q) + w sqrt(E f^4))^2
    json p;
    p["design"] = "gaussian-1d";
    p["noise_sd"] = 0.5;
    out.push_back(abs_error_report("fourth-moment-factor-1d", p, terms.value, direct, 1e-8));
  }
  {
    // Independent cells: the whitened top eigenvalue has the closed form
    // max_j E[(Y - f*)^2 | cell j].
    Eigen::VectorXd probs(2);
    probs << 0.3, 0.7;
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -0.05);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 0.05);
    const ParamBox box{lo, hi};
    const DistributionSpec spec =
        DistributionSpec::partition_design(probs, 0.1, NoiseSpec::gaussian(0.2), box);
    const Eigen::VectorXd theta_star = constrained_argmin_quadratic(spec.gram(), spec.cross_moment(), box);
    const FourthMomentOracle oracle = make_fourth_moment_oracle(spec, theta_star);
    const FourthMomentTerms terms = fourth_moment_variance_factor(oracle, box, 32, seed);
    double closed = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double gap = 0.1 - theta_star[j];
      closed = std::max(closed, gap * gap + 0.04);
    }
    json p;
    p["design"] = "partition-2-cells";
    out.push_back(
        abs_error_report("fourth-moment-geneig-partition", p, terms.weighted_sup, closed, 1e-10));
  }
  return out;
}

}  // namespace

std::vector<std::string> verify_suites() {
  return {"truncation", "constants", "complexity", "log-laplace", "variance"};
}

std::vector<MarginReport> verify_battery(const std::string& suite, std::uint64_t seed) {
  if (suite == "truncation") return truncation_suite();
  if (suite == "constants") return constants_suite();
  if (suite == "complexity") return complexity_suite();
  if (suite == "log-laplace") return log_laplace_suite(seed);
  if (suite == "variance") return variance_suite(seed);
  if (suite == "all") {
    std::vector<MarginReport> out;
    for (const std::string& s : verify_suites()) {
      std::vector<MarginReport> part = verify_battery(s, seed);
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    return out;
  }
  throw std::invalid_argument("verify_battery: unknown suite '" + suite +
                              "' (expected truncation, constants, complexity, log-laplace, "
                              "variance, or all)");
}

}  // namespace robustreg
