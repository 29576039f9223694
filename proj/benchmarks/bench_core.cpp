// Micro-benchmarks for the hot paths: the truncated tilt evaluation that
// dominates posterior sampling, the soft-truncated mean, and a full
// Metropolis-Hastings run on a small tilt target.
#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "robustreg/posterior.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/synthetic.hpp"
#include "robustreg/truncation.hpp"

namespace {

using namespace robustreg;

DistributionSpec bench_spec(int d) {
  Eigen::VectorXd probs = Eigen::VectorXd::Constant(d, 1.0 / d);
  ParamBox box(Eigen::VectorXd::Constant(d, -0.2), Eigen::VectorXd::Constant(d, 0.2));
  return DistributionSpec::partition_design(probs, 0.05, NoiseSpec::student_t(3.0, 0.1), box);
}

void BM_TruncatedTiltLogScore(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const DistributionSpec spec = bench_spec(2);
  const Dataset data = spec.sample(n, 7);
  const FeatureMap fmap = spec.feature_map();
  const PriorSampleSet prior = PriorSampleSet::generate(spec.box(), m, 11);
  const TruncatedTilt tilt(data, fmap, 0.9, prior);
  Eigen::VectorXd theta = spec.box().center();
  double acc = 0.0;
  for (auto _ : state) {
    acc += tilt.log_score(theta);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * m);
}
BENCHMARK(BM_TruncatedTiltLogScore)->Args({100, 256})->Args({400, 256})->Args({400, 1024});

void BM_RobustMean(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.student_t(3.0);
  double acc = 0.0;
  for (auto _ : state) {
    acc += robust_mean(y, 0.01);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_RobustMean)->Arg(500)->Arg(5000);

void BM_MhSampleTilt(benchmark::State& state) {
  const DistributionSpec spec = bench_spec(2);
  const Dataset data = spec.sample(200, 7);
  const FeatureMap fmap = spec.feature_map();
  const PriorSampleSet prior = PriorSampleSet::generate(spec.box(), 128, 11);
  const TruncatedTilt tilt(data, fmap, 0.9, prior);
  PosteriorConfig cfg;
  cfg.chain_length = 500;
  cfg.burn_in = 100;
  cfg.seed = 5;
  for (auto _ : state) {
    const ChainResult chain =
        mh_sample([&](const Eigen::VectorXd& t) { return tilt.log_density(t); }, spec.box(), cfg);
    benchmark::DoNotOptimize(chain.acceptance_rate);
  }
  state.SetItemsProcessed(state.iterations() * cfg.chain_length);
}
BENCHMARK(BM_MhSampleTilt);

}  // namespace

BENCHMARK_MAIN();
