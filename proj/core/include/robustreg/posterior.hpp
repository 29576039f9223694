#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "robustreg/model.hpp"
#include "robustreg/rng.hpp"

namespace robustreg {

/// Frozen uniform draws from the box, shared by every density evaluation of
/// one chain (common random numbers).  Generation is sequential, so the
/// first m draws of a 2m-sample set with the same seed coincide.
struct PriorSampleSet {
  Eigen::MatrixXd thetas;  // m x d
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(thetas.rows()); }
  static PriorSampleSet generate(const ParamBox& box, int m, std::uint64_t seed);
};

struct PosteriorConfig {
  double lambda = 0.0;
  int prior_samples = 256;
  int chain_length = 4000;
  int burn_in = 1000;
  int thin = 1;                    // keep every thin-th post-burn-in state
  Eigen::VectorXd proposal_scale;  // empty -> 5% of each box width
  bool adapt_proposal = true;      // halve/double during burn-in, frozen after
  bool mirror_truncation = false;  // use the mirror influence curve in the tilt
  std::uint64_t seed = 0;

  /// 0.32 (2 sigma + H)^-2, the default influence scale given a conditional
  /// noise bound sigma and class sup-norm diameter H.
  static double default_lambda(double sigma, double H);
};

struct ChainResult {
  Eigen::MatrixXd draws;             // kept x d, post burn-in
  Eigen::VectorXd log_density_trace; // target log-density of each kept state
  double acceptance_rate = 0.0;      // post burn-in
  Eigen::VectorXd proposal_scale;    // frozen scale actually used
  std::string warning;               // set when acceptance is degenerate

  Eigen::VectorXd final_draw() const;  // the randomized estimator
};

/// Cached evaluator of the truncated-tilt score
///   score(theta) = logmeanexp_j sum_i T( lambda [ (y_i - f_theta(x_i))^2
///                                              - (y_i - f'_j(x_i))^2 ] )
/// over the frozen prior samples f'_j.  Prior-sample residuals are
/// precomputed once; each evaluation is one dense m x n pass.
class TruncatedTilt {
 public:
  TruncatedTilt(const Dataset& data, const FeatureMap& fmap, double lambda,
                const PriorSampleSet& prior, bool mirror = false);

  /// the Monte Carlo score; empty datasets give 0 for every theta
  double log_score(const Eigen::VectorXd& theta) const;
  /// unnormalized log-density of the truncated posterior: -log_score
  double log_density(const Eigen::VectorXd& theta) const { return -log_score(theta); }

  int m() const { return static_cast<int>(prior_sq_.rows()); }
  int n() const { return static_cast<int>(y_.size()); }

 private:
  double lambda_;
  bool mirror_;
  Eigen::MatrixXd design_;    // n x d
  Eigen::VectorXd y_;
  Eigen::ArrayXXd prior_sq_;  // m x n, (y_i - f'_j(x_i))^2
  mutable Eigen::ArrayXXd w_; // workspace
};

/// One-shot versions (build the cache, evaluate once).
double trunc_posterior_score(const Eigen::VectorXd& theta, const Dataset& data,
                             const FeatureMap& fmap, double lambda, const PriorSampleSet& prior,
                             bool mirror = false);
double log_posterior_trunc(const Eigen::VectorXd& theta, const Dataset& data,
                           const FeatureMap& fmap, double lambda, const PriorSampleSet& prior,
                           bool mirror = false);

/// Exponential-weights log-density: -lambda * sum_i loss(y_i, f_theta(x_i)).
double log_posterior_gibbs(const Eigen::VectorXd& theta, const Dataset& data,
                           const FeatureMap& fmap, double lambda,
                           const LossSpec& loss = LossSpec::least_squares());

/// Gaussian random-walk Metropolis on the box; proposals outside the box are
/// rejected outright (uniform-prior support).  Deterministic given cfg.seed.
ChainResult mh_sample(const std::function<double(const Eigen::VectorXd&)>& log_density,
                      const ParamBox& box, const PosteriorConfig& cfg);

/// Coordinatewise average of the kept draws (the deterministic estimator).
LinearModel posterior_mean(const ChainResult& chain);

/// Midpoint-rule normalized masses for d <= 2 targets; the independent
/// oracle the samplers are validated against.
struct GridPosterior {
  ParamBox box;
  int resolution = 0;          // nodes per axis
  Eigen::MatrixXd nodes;       // cells x d midpoints (row-major over axes)
  Eigen::VectorXd mass;        // normalized, sums to 1

  /// aggregate the masses along one axis into `bins` equal intervals
  /// (resolution must be a multiple of bins)
  Eigen::VectorXd binned_axis_mass(int axis, int bins) const;
};

GridPosterior grid_posterior(const std::function<double(const Eigen::VectorXd&)>& log_density,
                             const ParamBox& box, int resolution);

/// Fraction of values per bin over [lo, hi] (values outside are clamped).
Eigen::VectorXd bin_samples(const Eigen::VectorXd& values, double lo, double hi, int bins);

/// Total-variation distance between two finite mass vectors.
double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace robustreg
