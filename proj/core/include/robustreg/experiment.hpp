#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "robustreg/bounds.hpp"
#include "robustreg/kvconfig.hpp"
#include "robustreg/synthetic.hpp"

namespace robustreg {

/// An estimator id plus numeric parameters, e.g. "ridge(lambda=0.1)" or
/// "trunc-pacbayes(m=256, chain=4000, burnin=1000)".  A single bare value is
/// shorthand for lambda.
struct EstimatorSpec {
  std::string id;
  std::map<std::string, double> params;  // sorted => canonical label

  static EstimatorSpec parse(const std::string& text);
  std::string label() const;
  double param_or(const std::string& key, double fallback) const;

  static const std::vector<std::string>& known_ids();
};

struct ExperimentConfig {
  explicit ExperimentConfig(DistributionSpec s) : spec(std::move(s)) {}

  DistributionSpec spec;
  std::vector<EstimatorSpec> estimators;
  std::vector<int> sample_sizes;
  int replications = 1;
  std::vector<double> eps_levels;  // confidence levels audited per bound
  std::uint64_t master_seed = 1;
  std::string out_path;  // prefix for <prefix>_reps/_summary/_bounds.csv
  int threads = 1;

  void validate() const;
  static ExperimentConfig from_kv(const KvFile& file);
  static ExperimentConfig from_file(const std::string& path);
};

struct ReplicationResult {
  std::string estimator;
  int n = 0;
  int rep = 0;
  double excess_risk = 0.0;
  double accept_rate = std::numeric_limits<double>::quiet_NaN();  // NaN: not applicable
  double wall_ms = 0.0;  // the only nondeterministic column
  bool failed = false;
  std::string error;
};

struct AggregateRow {
  std::string estimator;
  int n = 0;
  std::string stat;
  double value = 0.0;
};

struct Report {
  std::vector<std::string> header;  // '#' comment lines (seeding scheme etc.)
  std::vector<ReplicationResult> replications;
  std::vector<AggregateRow> aggregates;
  std::vector<MarginReport> bounds;
};

/// A fitted coefficient vector plus fit diagnostics.  clipped marks the
/// estimators whose predictions are truncated to [-clip_bound, clip_bound]
/// after the linear fit.
struct FitOutcome {
  Eigen::VectorXd theta;
  double accept_rate = std::numeric_limits<double>::quiet_NaN();
  bool clipped = false;
  double clip_bound = 0.0;
};

/// Fits one estimator on a fixed dataset.  box is required by the
/// box-constrained estimators (erm-box, gibbs, trunc-pacbayes*); spec, when
/// available, supplies the default influence scale and clip bound — without
/// it those parameters must be passed explicitly.
FitOutcome fit_estimator(const EstimatorSpec& estimator, const Dataset& data,
                         const FeatureMap& fmap, const ParamBox* box,
                         const DistributionSpec* spec, std::uint64_t seed);

/// Samples the dataset from a stream keyed by (master seed, n, rep) — shared
/// by every estimator so comparisons are paired — then fits with a stream
/// keyed by (master seed, estimator label, n, rep).  Excess risk is exact,
/// via the moment oracle.  Estimator failures are captured, not thrown.
ReplicationResult run_replication(const DistributionSpec& spec, const RiskOracle& oracle,
                                  const EstimatorSpec& estimator, int n,
                                  std::uint64_t master_seed, int rep);

/// Maps run_replication over the (estimator, n, rep) grid with a worker
/// pool, aggregates quantiles, and audits each bound whose hypotheses the
/// spec meets.  The result is independent of the thread count.
Report run_experiment(const ExperimentConfig& config);

/// Writes <prefix>_reps.csv, <prefix>_summary.csv, <prefix>_bounds.csv
/// (overwriting), creating parent directories as needed.
void emit_report(const Report& report, const std::string& path_prefix);

/// Round-trip reader for the per-replication CSV (comments skipped, empty
/// numeric fields parsed as NaN).
std::vector<ReplicationResult> read_replications_csv(const std::string& path);

// --- small deterministic statistics helpers ---
double mean_of(const std::vector<double>& xs);
/// Lower empirical quantile (order statistic ceil(q n)), deterministic.
double quantile_of(std::vector<double> xs, double q);

}  // namespace robustreg
