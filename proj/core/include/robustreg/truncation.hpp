#pragma once

#include <Eigen/Core>

namespace robustreg {

/// Soft truncation T(x) = -log(1 - x + x^2/2): behaves like x near 0 and
/// saturates logarithmically, capping the influence of extreme values.
/// The quadratic 1 - x + x^2/2 is >= 1/2 for all real x, so T is total.
double soft_trunc(double x);

/// Mirror variant psi(x) = log(1 + x + x^2/2) = -soft_trunc(-x).
double soft_trunc_mirror(double x);

/// Scaled squared-loss gap W = lambda * [(y - fa)^2 - (y - fb)^2] between
/// two predictions at one observation.
double scaled_loss_gap(double lambda, double y, double pred_a, double pred_b);

double empirical_mean(const Eigen::VectorXd& y);

/// Influence scale lambda = sqrt(2 log(1/eps) / n) giving the deviation
/// guarantee |estimate - E Y| <= sqrt(2 log(1/eps)/n) w.p. >= 1 - 2 eps
/// when E[Y^2] <= 1.
double robust_mean_scale(double eps, int n);

/// Deviation radius sqrt(2 log(1/eps)/n) matching robust_mean_scale.
double robust_mean_deviation(double eps, int n);

/// Soft-truncated mean with explicit influence scale:
/// (1/(n lambda)) sum_i log(1 + lambda y_i + lambda^2 y_i^2 / 2).
double robust_mean_fixed(const Eigen::VectorXd& y, double lambda);

/// Soft-truncated mean at confidence level eps (scale chosen as above).
double robust_mean(const Eigen::VectorXd& y, double eps);

/// log( (1/m) sum_j exp(s_j) ), max-shifted for stability; deterministic
/// left-to-right accumulation.
double log_mean_exp(const Eigen::VectorXd& s);

}  // namespace robustreg
