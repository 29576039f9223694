#include "robustreg/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace robustreg {

OlsResult ols_fit(const Dataset& data, const FeatureMap& fmap) {
  if (data.n() == 0) throw std::invalid_argument("ols_fit: empty dataset");
  const Eigen::MatrixXd X = design_matrix(fmap, data);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);  // minimum-norm solve
  OlsResult out;
  out.model.theta = cod.solve(data.outputs);
  out.rank = cod.rank();
  return out;
}

double ClippedPredictor::operator()(const FeatureMap& fmap, const InputPoint& x) const {
  return std::clamp(predict(model, fmap, x), -bound, bound);
}

ClippedPredictor truncate_predictor(LinearModel model, double bound) {
  if (!(bound >= 0.0)) throw std::invalid_argument("truncate_predictor: bound must be nonnegative");
  return ClippedPredictor{std::move(model), bound};
}

LinearModel ridge_fit(const Dataset& data, const FeatureMap& fmap, double lambda) {
  if (data.n() == 0) throw std::invalid_argument("ridge_fit: empty dataset");
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge_fit: lambda must be positive");
  const Eigen::MatrixXd X = design_matrix(fmap, data);
  const double n = static_cast<double>(data.n());
  Eigen::MatrixXd A = X.transpose() * X / n;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = X.transpose() * data.outputs / n;
  return LinearModel{Eigen::LLT<Eigen::MatrixXd>(A).solve(rhs)};
}

LinearModel projection_fit(const Dataset& data, const FeatureMap& fmap) {
  if (data.n() == 0) throw std::invalid_argument("projection_fit: empty dataset");
  if (!fmap.orthonormal())
    throw std::invalid_argument(
        "projection_fit: feature map must be declared orthonormal for the design law");
  const Eigen::MatrixXd X = design_matrix(fmap, data);
  return LinearModel{X.transpose() * data.outputs / static_cast<double>(data.n())};
}

LinearModel erm_box_fit(const Dataset& data, const FeatureMap& fmap, const ParamBox& box,
                        const ErmOptions& opts) {
  if (data.n() == 0) throw std::invalid_argument("erm_box_fit: empty dataset");
  if (box.dim() != fmap.dim()) throw std::invalid_argument("erm_box_fit: box/feature dimension mismatch");
  const Eigen::MatrixXd X = design_matrix(fmap, data);
  const double n = static_cast<double>(data.n());
  const Eigen::MatrixXd G = 2.0 * X.transpose() * X / n;      // risk Hessian
  const Eigen::VectorXd h = 2.0 * X.transpose() * data.outputs / n;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const double L = es.eigenvalues().maxCoeff();
  Eigen::VectorXd t = box.center();
  if (!(L > 0.0)) return LinearModel{t};  // all-zero design: risk is flat over the box

  const double step = 1.0 / L;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Eigen::VectorXd g = G * t - h;  // gradient of the empirical risk
    const Eigen::VectorXd next = box.clip(t - step * g);
    if ((next - t).lpNorm<Eigen::Infinity>() <= opts.tol) return LinearModel{next};
    t = next;
  }
  throw ErmConvergenceError("erm_box_fit: projected gradient did not reach tol " +
                                std::to_string(opts.tol) + " in " + std::to_string(opts.max_iters) +
                                " iterations",
                            t);
}

}  // namespace robustreg
