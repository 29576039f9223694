// Tests for the truncated-tilt posterior, the exponential-weights reference
// density, the Metropolis sampler, and the midpoint-grid oracle used to
// validate the sampler's law.  The tilt score itself is checked against a
// from-scratch hand implementation on tiny fixtures.
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "robustreg/model.hpp"
#include "robustreg/posterior.hpp"
#include "robustreg/truncation.hpp"

using namespace robustreg;

namespace {

Dataset raw_dataset(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Dataset d;
  d.outputs = y;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    d.inputs.push_back(InputPoint::from_coords(Eigen::VectorXd::Constant(1, x[i])));
  return d;
}

FeatureMap raw1() { return FeatureMap::raw_coordinates(1, Eigen::VectorXd::Constant(1, 2.0)); }

ParamBox box1(double r = 1.0) {
  return ParamBox(Eigen::VectorXd::Constant(1, -r), Eigen::VectorXd::Constant(1, r));
}

// independent re-implementation of the tilt score for 1-d raw features
double hand_score(double theta, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lambda,
                  const Eigen::MatrixXd& prior_thetas, bool mirror) {
  const auto influence = mirror ? soft_trunc_mirror : soft_trunc;
  Eigen::VectorXd per_prior(prior_thetas.rows());
  for (Eigen::Index j = 0; j < prior_thetas.rows(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double r_theta = y[i] - theta * x[i];
      const double r_prior = y[i] - prior_thetas(j, 0) * x[i];
      s += influence(lambda * (r_theta * r_theta - r_prior * r_prior));
    }
    per_prior[j] = s;
  }
  return log_mean_exp(per_prior);
}

PriorSampleSet fixed_prior(std::initializer_list<double> vals) {
  PriorSampleSet ps;
  ps.thetas.resize(static_cast<Eigen::Index>(vals.size()), 1);
  Eigen::Index i = 0;
  for (double v : vals) ps.thetas(i++, 0) = v;
  return ps;
}

}  // namespace

TEST_SUITE_BEGIN("posterior");

TEST_CASE("prior sample sets: box support, determinism, nested prefixes") {
  const ParamBox box(Eigen::Vector2d(-1.0, 0.5), Eigen::Vector2d(2.0, 0.75));
  const PriorSampleSet a = PriorSampleSet::generate(box, 64, 99);
  REQUIRE(a.m() == 64);
  REQUIRE(a.thetas.cols() == 2);
  for (int j = 0; j < a.m(); ++j) CHECK(box.contains(a.thetas.row(j).transpose()));

  const PriorSampleSet b = PriorSampleSet::generate(box, 64, 99);
  CHECK((a.thetas.array() == b.thetas.array()).all());
  const PriorSampleSet other = PriorSampleSet::generate(box, 64, 100);
  CHECK((a.thetas.array() != other.thetas.array()).any());

  // sequential generation: doubling m extends the set, it does not reshuffle
  const PriorSampleSet big = PriorSampleSet::generate(box, 128, 99);
  CHECK((big.thetas.topRows(64).array() == a.thetas.array()).all());

  CHECK_THROWS_AS(PriorSampleSet::generate(box, 0, 1), std::invalid_argument);
}

TEST_CASE("default influence scale") {
  CHECK(PosteriorConfig::default_lambda(1.0, 1.0) == doctest::Approx(0.32 / 9.0).epsilon(1e-15));
  CHECK(PosteriorConfig::default_lambda(0.5, 2.0) == doctest::Approx(0.32 / 9.0).epsilon(1e-15));
  CHECK(PosteriorConfig::default_lambda(0.0, 1.0) == doctest::Approx(0.32).epsilon(1e-15));
  CHECK_THROWS_AS(PosteriorConfig::default_lambda(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PosteriorConfig::default_lambda(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("tilt score matches a from-scratch implementation") {
  Eigen::VectorXd x(3), y(3);
  x << 1.0, -0.5, 2.0;
  y << 0.8, -0.3, 1.4;
  const Dataset data = raw_dataset(x, y);
  const double lambda = 0.35;
  const PriorSampleSet prior = fixed_prior({0.2, -0.6});

  for (bool mirror : {false, true}) {
    CAPTURE(mirror);
    const TruncatedTilt tilt(data, raw1(), lambda, prior, mirror);
    CHECK(tilt.m() == 2);
    CHECK(tilt.n() == 3);
    for (double theta : {-0.9, -0.25, 0.0, 0.4, 0.7, 1.0}) {
      const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, theta);
      const double expected = hand_score(theta, x, y, lambda, prior.thetas, mirror);
      CHECK(tilt.log_score(t) == doctest::Approx(expected).epsilon(1e-12));
      CHECK(tilt.log_density(t) == doctest::Approx(-expected).epsilon(1e-12));
      // one-shot wrappers agree with the cached evaluator
      CHECK(trunc_posterior_score(t, data, raw1(), lambda, prior, mirror) ==
            doctest::Approx(expected).epsilon(1e-12));
      CHECK(log_posterior_trunc(t, data, raw1(), lambda, prior, mirror) ==
            doctest::Approx(-expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("mirror truncation dominates the plain one pathwise") {
  Eigen::VectorXd x(5), y(5);
  x << 1.0, -0.5, 2.0, 0.3, -1.2;
  y << 0.8, -0.3, 1.4, 5.0, -4.0;  // includes two wild outputs
  const Dataset data = raw_dataset(x, y);
  const PriorSampleSet prior = PriorSampleSet::generate(box1(), 16, 7);
  const TruncatedTilt plain(data, raw1(), 0.4, prior, false);
  const TruncatedTilt mirrored(data, raw1(), 0.4, prior, true);
  for (double theta = -1.0; theta <= 1.0; theta += 0.125) {
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, theta);
    CHECK(mirrored.log_score(t) >= plain.log_score(t) - 1e-13);
  }
}

TEST_CASE("tilt construction guards") {
  Eigen::VectorXd x(2), y(2);
  x << 1.0, 2.0;
  y << 0.5, -0.5;
  const Dataset data = raw_dataset(x, y);
  const PriorSampleSet prior = fixed_prior({0.1});
  CHECK_THROWS_AS(TruncatedTilt(data, raw1(), 0.0, prior), std::invalid_argument);
  CHECK_THROWS_AS(TruncatedTilt(data, raw1(), -0.1, prior), std::invalid_argument);
  PriorSampleSet empty;
  empty.thetas.resize(0, 1);
  CHECK_THROWS_AS(TruncatedTilt(data, raw1(), 0.5, empty), std::invalid_argument);
  PriorSampleSet wrong_dim;
  wrong_dim.thetas.resize(3, 2);
  CHECK_THROWS_AS(TruncatedTilt(data, raw1(), 0.5, wrong_dim), std::invalid_argument);

  // an empty dataset scores zero everywhere (log of a mean of exp(0) terms)
  const TruncatedTilt trivial(Dataset{}, raw1(), 0.5, prior);
  CHECK(trivial.log_score(Eigen::VectorXd::Constant(1, 0.3)) == 0.0);
}

TEST_CASE("exponential-weights log-density") {
  Eigen::VectorXd x(3), y(3);
  x << 1.0, -0.5, 2.0;
  y << 0.8, -0.3, 1.4;
  const Dataset data = raw_dataset(x, y);
  const double lambda = 0.7;
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, 0.25);
  double sq = 0.0, ab = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double r = y[i] - 0.25 * x[i];
    sq += r * r;
    ab += std::abs(r);
  }
  CHECK(log_posterior_gibbs(t, data, raw1(), lambda) ==
        doctest::Approx(-lambda * sq).epsilon(1e-14));

  LossSpec abs_loss;
  abs_loss.value = [](double yy, double z) { return std::abs(yy - z); };
  abs_loss.b1 = 0.0;
  abs_loss.b2 = 0.0;
  CHECK(log_posterior_gibbs(t, data, raw1(), lambda, abs_loss) ==
        doctest::Approx(-lambda * ab).epsilon(1e-14));
  CHECK_THROWS_AS(log_posterior_gibbs(t, data, raw1(), 0.0), std::invalid_argument);
}

TEST_CASE("vanishing influence scale recovers the exponential-weights shape") {
  // with lambda -> 0 the truncation is inactive and the tilt log-density
  // equals -lambda * sum of squared residuals up to a theta-free constant
  Eigen::VectorXd x(20), y(20);
  for (int i = 0; i < 20; ++i) {
    x[i] = std::sin(0.8 * i) + 0.2;
    y[i] = 0.4 * x[i] + 0.25 * std::cos(3.0 * i);
  }
  const Dataset data = raw_dataset(x, y);
  const double lambda = 1e-6;
  const PriorSampleSet prior = PriorSampleSet::generate(box1(), 32, 11);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double theta = -1.0; theta <= 1.0; theta += 0.0625) {
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, theta);
    const double sq = (y - theta * x).squaredNorm();
    const double c = log_posterior_trunc(t, data, raw1(), lambda, prior) + lambda * sq;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  CHECK(hi - lo <= 1e-10);
}

TEST_CASE("tilt score is invariant under permuting the prior samples") {
  Eigen::VectorXd x(4), y(4);
  x << 1.0, -0.5, 2.0, 0.3;
  y << 0.8, -0.3, 1.4, -0.6;
  const Dataset data = raw_dataset(x, y);
  const PriorSampleSet prior = fixed_prior({0.2, -0.6, 0.9, -0.1, 0.5});
  PriorSampleSet shuffled = prior;
  shuffled.thetas.row(0).swap(shuffled.thetas.row(3));
  shuffled.thetas.row(1).swap(shuffled.thetas.row(4));
  const TruncatedTilt a(data, raw1(), 0.3, prior);
  const TruncatedTilt b(data, raw1(), 0.3, shuffled);
  for (double theta : {-0.7, 0.0, 0.55}) {
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, theta);
    CHECK(a.log_score(t) == doctest::Approx(b.log_score(t)).epsilon(1e-12));
  }
}

TEST_CASE("metropolis: keep rule, final draw, determinism") {
  const ParamBox box = box1();
  auto target = [](const Eigen::VectorXd& t) { return -8.0 * (t[0] - 0.5) * (t[0] - 0.5); };

  PosteriorConfig cfg;
  cfg.chain_length = 60000;
  cfg.burn_in = 10000;
  cfg.thin = 5;
  cfg.seed = 2024;
  const ChainResult chain = mh_sample(target, box, cfg);
  // counting back from the final state, every 5th post-burn-in state is kept
  REQUIRE(chain.draws.rows() == 10000);
  CHECK(chain.draws.cols() == 1);
  CHECK((chain.final_draw().array() ==
         chain.draws.row(chain.draws.rows() - 1).transpose().array())
            .all());
  for (Eigen::Index k = 0; k < chain.draws.rows(); ++k)
    CHECK(box.contains(chain.draws.row(k).transpose()));
  // the recorded trace is the target value of the kept state
  CHECK(chain.log_density_trace[0] == doctest::Approx(target(chain.draws.row(0).transpose())));
  CHECK(chain.log_density_trace[9999] ==
        doctest::Approx(target(chain.draws.row(9999).transpose())));
  CHECK(chain.acceptance_rate > 0.1);
  CHECK(chain.acceptance_rate < 0.9);
  CHECK(chain.warning.empty());

  const ChainResult again = mh_sample(target, box, cfg);
  CHECK((chain.draws.array() == again.draws.array()).all());
  PosteriorConfig reseeded = cfg;
  reseeded.seed = 2025;
  const ChainResult divergent = mh_sample(target, box, reseeded);
  CHECK((chain.draws.array() != divergent.draws.array()).any());

  PosteriorConfig unthinned = cfg;
  unthinned.chain_length = 500;
  unthinned.burn_in = 100;
  unthinned.thin = 1;
  CHECK(mh_sample(target, box, unthinned).draws.rows() == 400);
}

TEST_CASE("metropolis: configuration guards") {
  const ParamBox box = box1();
  auto target = [](const Eigen::VectorXd& t) { return -t.squaredNorm(); };
  PosteriorConfig cfg;
  cfg.chain_length = 0;
  CHECK_THROWS_AS(mh_sample(target, box, cfg), std::invalid_argument);
  cfg.chain_length = 100;
  cfg.burn_in = 100;
  CHECK_THROWS_AS(mh_sample(target, box, cfg), std::invalid_argument);
  cfg.burn_in = -1;
  CHECK_THROWS_AS(mh_sample(target, box, cfg), std::invalid_argument);
  cfg.burn_in = 10;
  cfg.thin = 0;
  CHECK_THROWS_AS(mh_sample(target, box, cfg), std::invalid_argument);
  cfg.thin = 1;
  cfg.proposal_scale = Eigen::VectorXd::Constant(2, 0.1);  // wrong dimension
  CHECK_THROWS_AS(mh_sample(target, box, cfg), std::invalid_argument);
  cfg.proposal_scale = Eigen::VectorXd::Constant(1, 0.0);  // nonpositive
  CHECK_THROWS_AS(mh_sample(target, box, cfg), std::invalid_argument);
}

TEST_CASE("posterior mean averages the kept draws") {
  ChainResult chain;
  chain.draws.resize(3, 2);
  chain.draws << 1.0, 4.0, 2.0, 5.0, 3.0, 9.0;
  const LinearModel mean = posterior_mean(chain);
  CHECK(mean.theta[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mean.theta[1] == doctest::Approx(6.0).epsilon(1e-15));
  ChainResult empty;
  empty.draws.resize(0, 2);
  CHECK_THROWS_AS(posterior_mean(empty), std::invalid_argument);
  CHECK_THROWS_AS(empty.final_draw(), std::logic_error);
}

TEST_CASE("grid oracle: normalized mass and a frozen gaussian mean") {
  const ParamBox box = box1();
  auto target = [](const Eigen::VectorXd& t) { return -8.0 * (t[0] - 0.5) * (t[0] - 0.5); };
  const GridPosterior grid = grid_posterior(target, box, 4096);
  REQUIRE(grid.resolution == 4096);
  REQUIRE(grid.mass.size() == 4096);
  CHECK(grid.mass.minCoeff() >= 0.0);
  CHECK(grid.mass.sum() == doctest::Approx(1.0).epsilon(1e-12));
  const double h = 2.0 / 4096;
  CHECK(grid.nodes(0, 0) == doctest::Approx(-1.0 + 0.5 * h).epsilon(1e-12));
  // mean of the density exp(-8 (t - 0.5)^2) restricted to [-1, 1]
  const double mean = (grid.nodes.col(0).array() * grid.mass.array()).sum();
  CHECK(mean == doctest::Approx(0.48618803587064054).epsilon(1e-5));
}

TEST_CASE("grid oracle: separable 2-d targets factorize along axes") {
  const ParamBox box(Eigen::Vector2d(-1.0, -0.5), Eigen::Vector2d(1.0, 1.5));
  auto joint = [](const Eigen::VectorXd& t) {
    return -3.0 * (t[0] - 0.2) * (t[0] - 0.2) - 1.5 * (t[1] - 0.6) * (t[1] - 0.6);
  };
  const GridPosterior grid2 = grid_posterior(joint, box, 64);
  CHECK(grid2.mass.sum() == doctest::Approx(1.0).epsilon(1e-12));

  const ParamBox axis0(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
  auto factor0 = [](const Eigen::VectorXd& t) { return -3.0 * (t[0] - 0.2) * (t[0] - 0.2); };
  const GridPosterior grid1 = grid_posterior(factor0, axis0, 64);

  const Eigen::VectorXd marg = grid2.binned_axis_mass(0, 16);
  const Eigen::VectorXd ref = grid1.binned_axis_mass(0, 16);
  REQUIRE(marg.size() == 16);
  CHECK(marg.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int b = 0; b < 16; ++b) CHECK(marg[b] == doctest::Approx(ref[b]).epsilon(1e-10));

  CHECK_THROWS_AS(grid2.binned_axis_mass(2, 16), std::invalid_argument);
  CHECK_THROWS_AS(grid2.binned_axis_mass(0, 48), std::invalid_argument);
}

TEST_CASE("grid oracle: guards") {
  const ParamBox box3(Eigen::Vector3d(-1, -1, -1), Eigen::Vector3d(1, 1, 1));
  auto flat = [](const Eigen::VectorXd&) { return 0.0; };
  CHECK_THROWS_AS(grid_posterior(flat, box3, 64), std::invalid_argument);
  CHECK_THROWS_AS(grid_posterior(flat, box1(), 8), std::invalid_argument);
  auto bad = [](const Eigen::VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(grid_posterior(bad, box1(), 64), std::runtime_error);
}

TEST_CASE("sampler law matches the grid oracle in total variation") {
  const ParamBox box = box1();
  auto target = [](const Eigen::VectorXd& t) { return -8.0 * (t[0] - 0.5) * (t[0] - 0.5); };
  PosteriorConfig cfg;
  cfg.chain_length = 40000;
  cfg.burn_in = 10000;
  cfg.thin = 3;
  cfg.seed = 5150;
  const ChainResult chain = mh_sample(target, box, cfg);
  REQUIRE(chain.draws.rows() == 10000);
  const Eigen::VectorXd hist = bin_samples(chain.draws.col(0), -1.0, 1.0, 16);
  const Eigen::VectorXd ref = grid_posterior(target, box, 4096).binned_axis_mass(0, 16);
  CHECK(total_variation(hist, ref) <= 0.05);
}

TEST_CASE("sample binning") {
  Eigen::VectorXd v(5);
  v << -0.9, -0.9, 0.1, 0.95, 2.0;  // the last value clamps into the top bin
  const Eigen::VectorXd h = bin_samples(v, -1.0, 1.0, 4);
  REQUIRE(h.size() == 4);
  CHECK(h[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(h[1] == doctest::Approx(0.0).scale(1).epsilon(1e-15));
  CHECK(h[2] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(h[3] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(h.sum() == doctest::Approx(1.0).epsilon(1e-15));
  // boundary values land in the first / last bin
  Eigen::VectorXd edges(2);
  edges << -1.0, 1.0;
  const Eigen::VectorXd he = bin_samples(edges, -1.0, 1.0, 2);
  CHECK(he[0] == 0.5);
  CHECK(he[1] == 0.5);
  CHECK_THROWS_AS(bin_samples(v, -1.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(bin_samples(v, 1.0, -1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(bin_samples(Eigen::VectorXd(), -1.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("total variation distance") {
  Eigen::VectorXd p(2), q(2);
  p << 0.5, 0.5;
  q << 1.0, 0.0;
  CHECK(total_variation(p, q) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(total_variation(p, p) == 0.0);
  Eigen::VectorXd a(3), b(3);
  a << 0.2, 0.3, 0.5;
  b << 0.5, 0.3, 0.2;
  CHECK(total_variation(a, b) == doctest::Approx(0.3).epsilon(1e-15));
  Eigen::VectorXd wrong(2);
  wrong << 0.5, 0.5;
  CHECK_THROWS_AS(total_variation(a, wrong), std::invalid_argument);
}

TEST_SUITE_END();
