#pragma once

#include <string>
#include <utility>

#include <Eigen/Core>

#include "robustreg/model.hpp"
#include "robustreg/rng.hpp"

namespace robustreg {

enum class NoiseKind { Gaussian, StudentT, TwoPoint };

/// Additive output noise.  Student-t requires nu > 2 so the conditional
/// variance is finite; it has no exponential moments for any nu — the
/// heavy-tail regime this project targets.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double scale = 1.0;  // std dev (gaussian) or scale multiplier (student-t)
  double nu = 3.0;     // degrees of freedom (student-t only)

  static NoiseSpec gaussian(double sd);
  static NoiseSpec student_t(double nu, double scale);

  double variance() const;       // scale^2, or scale^2 * nu/(nu-2)
  double sample(Rng& rng) const;
};

/// A fully specified joint law of (X, Y) with closed-form moment oracles,
/// so true risk is computable exactly (never estimated from a test set).
class DistributionSpec {
 public:
  enum class Variant { GaussianDesign, PartitionDesign, Hypercube };

  /// X ~ N(0, Sigma), raw-coordinate features,
  /// Y = <theta0, X> + quad_coeff*(X_axis^2 - Sigma(axis,axis)) + noise.
  /// The centered quadratic term makes the regression function leave the
  /// linear span while keeping every moment oracle in closed form.
  static DistributionSpec gaussian_design(Eigen::MatrixXd sigma, Eigen::VectorXd theta0,
                                          NoiseSpec noise, ParamBox box, double quad_coeff = 0.0,
                                          int quad_axis = 0);

  /// d cells with probabilities p_j, Y = theta0 + noise independent of X.
  /// scaled=false: indicator features (Q = Diag(p)); scaled=true:
  /// orthonormalized indicators 1_j/sqrt(p_j) (Q = I).
  static DistributionSpec partition_design(Eigen::VectorXd cell_probs, double theta0,
                                           NoiseSpec noise, ParamBox box, bool scaled = false);

  /// Two-cell adversarial law with P(cell 1) = 1 - beta; Y = 0 on cell 1 and
  /// Y = +-1/sqrt(beta) on cell 2 with P(+) = (1 + sign*sqrt(beta))/2, so
  /// E[Y | cell 2] = sign.  Parameter box [-1,1]^2, indicator features.
  static DistributionSpec hypercube(double beta, int sign);

  Variant variant() const { return variant_; }
  int dim() const { return box_.dim(); }
  const ParamBox& box() const { return box_; }
  const NoiseSpec& noise() const { return noise_; }
  FeatureMap feature_map() const;

  // --- exact moment oracles ---
  Eigen::MatrixXd gram() const;                 // Q = E[phi phi^T]
  Eigen::VectorXd cross_moment() const;         // b = E[Y phi(X)]
  double output_second_moment() const;          // c0 = E[Y^2]
  double regression_sup() const;                // sup_x |E[Y|X=x]| (+inf if unbounded)
  double conditional_noise_second_moment() const;  // E[(Y - E[Y|X])^2]

  // variant-specific accessors (throw when not applicable)
  const Eigen::VectorXd& cell_probs() const;
  double location() const;            // theta0 of partition-design
  const Eigen::MatrixXd& design_cov() const;
  const Eigen::VectorXd& design_coef() const;  // theta0 of gaussian-design
  double quad_coeff() const { return quad_coeff_; }
  int quad_axis() const { return quad_axis_; }
  double hypercube_beta() const;
  int hypercube_sign() const;

  Dataset sample(int n, std::uint64_t seed) const;

  std::string serialize() const;
  static DistributionSpec deserialize(const std::string& text);

 private:
  DistributionSpec() : box_(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)) {}

  Variant variant_ = Variant::PartitionDesign;
  NoiseSpec noise_;
  ParamBox box_;
  // partition / hypercube
  Eigen::VectorXd cell_probs_;
  double location_ = 0.0;
  bool scaled_features_ = false;
  double beta_ = 0.0;
  int sign_ = 1;
  // gaussian design
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_chol_;  // lower factor, cached for sampling
  Eigen::VectorXd theta0_;
  double quad_coeff_ = 0.0;
  int quad_axis_ = 0;
};

/// Minimizer of the exact risk c0 - 2<theta,b> + theta^T Q theta over the box
/// (projected gradient, fixed step 1/L).  Throws with the best iterate
/// attached to the message on non-convergence.
Eigen::VectorXd constrained_argmin_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b,
                                             const ParamBox& box, double tol = 1e-11);

/// Exact true-risk evaluator: moments plus the box optimum.
struct RiskOracle {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
  double c0 = 0.0;
  ParamBox box;
  Eigen::VectorXd theta_star;
  double risk_star = 0.0;

  double risk(const Eigen::VectorXd& theta) const;
  double excess(const Eigen::VectorXd& theta) const { return risk(theta) - risk_star; }
};

RiskOracle make_risk_oracle(const DistributionSpec& spec, double tol = 1e-11);

/// sqrt of sup_x E[(Y - f*(X))^2 | X = x], exact per variant; throws when the
/// sup is infinite (gaussian design with a constrained or shifted optimum).
double sigma_sup_conditional(const DistributionSpec& spec, const ParamBox& box);

/// Exact risk of x -> clip(<theta, phi(x)>, [-clip_bound, clip_bound]).
/// Cell-based variants only (finitely many prediction values).
double clipped_predictor_risk(const DistributionSpec& spec, const Eigen::VectorXd& theta,
                              double clip_bound);

/// The worst-case pair (sign = -1, sign = +1) with beta = 1/(2 sqrt(n)).
std::pair<DistributionSpec, DistributionSpec> hypercube_pair(int n);

}  // namespace robustreg
