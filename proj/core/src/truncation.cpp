#include "robustreg/truncation.hpp"

#include <cmath>
#include <stdexcept>

namespace robustreg {

double soft_trunc(double x) { return -std::log1p(0.5 * x * x - x); }

double soft_trunc_mirror(double x) { return std::log1p(x + 0.5 * x * x); }

double scaled_loss_gap(double lambda, double y, double pred_a, double pred_b) {
  const double ra = y - pred_a, rb = y - pred_b;
  return lambda * (ra * ra - rb * rb);
}

double empirical_mean(const Eigen::VectorXd& y) {
  if (y.size() == 0) throw std::invalid_argument("empirical_mean: empty sample");
  return y.mean();
}

double robust_mean_scale(double eps, int n) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("robust_mean_scale: eps must be in (0,1)");
  if (n < 1) throw std::invalid_argument("robust_mean_scale: n must be positive");
  return std::sqrt(2.0 * std::log(1.0 / eps) / n);
}

double robust_mean_deviation(double eps, int n) { return robust_mean_scale(eps, n); }

double robust_mean_fixed(const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("robust_mean_fixed: empty sample");
  if (!(lambda > 0.0)) throw std::invalid_argument("robust_mean_fixed: lambda must be positive");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += soft_trunc_mirror(lambda * y[i]);
  return acc / (lambda * static_cast<double>(n));
}

double robust_mean(const Eigen::VectorXd& y, double eps) {
  return robust_mean_fixed(y, robust_mean_scale(eps, static_cast<int>(y.size())));
}

double log_mean_exp(const Eigen::VectorXd& s) {
  const Eigen::Index m = s.size();
  if (m == 0) throw std::invalid_argument("log_mean_exp: empty input");
  const double mx = s.maxCoeff();
  if (!std::isfinite(mx)) return mx;  // all -inf, or a stray inf/nan propagates
  double acc = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) acc += std::exp(s[j] - mx);
  return mx + std::log(acc / static_cast<double>(m));
}

}  // namespace robustreg
