#pragma once

#include <stdexcept>

#include <Eigen/Core>

#include "robustreg/model.hpp"

namespace robustreg {

struct OlsResult {
  LinearModel model;
  Eigen::Index rank = 0;  // numerical rank of the design matrix
};

/// Least-squares fit; rank-deficient designs get the minimum-norm solution
/// (pseudoinverse convention).
OlsResult ols_fit(const Dataset& data, const FeatureMap& fmap);

/// x -> clip(<theta, phi(x)>, [-bound, bound]); the classical remedy when a
/// sup-norm bound on the regression function is known.
struct ClippedPredictor {
  LinearModel model;
  double bound = 0.0;

  double operator()(const FeatureMap& fmap, const InputPoint& x) const;
};

ClippedPredictor truncate_predictor(LinearModel model, double bound);

/// Solves (X^T X / n + lambda I) theta = X^T Y / n.
LinearModel ridge_fit(const Dataset& data, const FeatureMap& fmap, double lambda);

/// theta_j = (1/n) sum_i Y_i phi_j(X_i); requires a feature map declared
/// orthonormal for the design law (otherwise it estimates the wrong target).
LinearModel projection_fit(const Dataset& data, const FeatureMap& fmap);

struct ErmOptions {
  double tol = 1e-8;       // projected-gradient fixed-point residual
  int max_iters = 200000;
};

/// Thrown when projected gradient stalls; carries the best iterate found.
class ErmConvergenceError : public std::runtime_error {
 public:
  ErmConvergenceError(std::string what, Eigen::VectorXd best_iterate)
      : std::runtime_error(std::move(what)), best(std::move(best_iterate)) {}
  Eigen::VectorXd best;
};

/// Empirical risk minimizer over the box: projected gradient descent on the
/// squared loss with fixed step 1/L, L = lambda_max(2 X^T X / n).
LinearModel erm_box_fit(const Dataset& data, const FeatureMap& fmap, const ParamBox& box,
                        const ErmOptions& opts = {});

}  // namespace robustreg
