#include "robustreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "robustreg/baselines.hpp"
#include "robustreg/posterior.hpp"

namespace robustreg {
namespace {

using json = nlohmann::ordered_json;

constexpr double kDefaultEtaPrime = 0.18;

}  // namespace

const std::vector<std::string>& EstimatorSpec::known_ids() {
  static const std::vector<std::string> ids = {"ols",     "ols-trunc", "ridge",
                                               "projection", "erm-box", "gibbs",
                                               "trunc-pacbayes", "trunc-pacbayes-mean"};
  return ids;
}

EstimatorSpec EstimatorSpec::parse(const std::string& text) {
  EstimatorSpec e;
  const std::string t = kv_trim(text);
  const std::size_t open = t.find('(');
  if (open == std::string::npos) {
    e.id = t;
  } else {
    if (t.empty() || t.back() != ')')
      throw std::invalid_argument("estimator '" + text + "': unbalanced parentheses");
    e.id = kv_trim(t.substr(0, open));
    const std::string inner = t.substr(open + 1, t.size() - open - 2);
    std::size_t start = 0;
    while (start <= inner.size() && !inner.empty()) {
      std::size_t comma = inner.find(',', start);
      if (comma == std::string::npos) comma = inner.size();
      const std::string item = kv_trim(inner.substr(start, comma - start));
      if (!item.empty()) {
        const std::size_t eq = item.find('=');
        std::string key = eq == std::string::npos ? "lambda" : kv_trim(item.substr(0, eq));
        const std::string val = eq == std::string::npos ? item : kv_trim(item.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("estimator '" + text + "': empty parameter name");
        if (e.params.count(key))
          throw std::invalid_argument("estimator '" + text + "': duplicate parameter " + key);
        e.params[key] = kv_to_double(val);
      }
      start = comma + 1;
      if (comma == inner.size()) break;
    }
  }
  const auto& ids = known_ids();
  if (std::find(ids.begin(), ids.end(), e.id) == ids.end())
    throw std::invalid_argument("unknown estimator id '" + e.id + "'");
  return e;
}

std::string EstimatorSpec::label() const {
  if (params.empty()) return id;
  std::string out = id + "(";
  bool first = true;
  for (const auto& [k, v] : params) {
    if (!first) out += ",";
    out += k + "=" + kv_from_double(v);
    first = false;
  }
  return out + ")";
}

double EstimatorSpec::param_or(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void ExperimentConfig::validate() const {
  if (estimators.empty()) throw std::invalid_argument("experiment config: no estimators");
  if (sample_sizes.empty()) throw std::invalid_argument("experiment config: no sample sizes");
  for (int n : sample_sizes)
    if (n < 2) throw std::invalid_argument("experiment config: sample sizes must be >= 2");
  if (replications < 1) throw std::invalid_argument("experiment config: replications must be >= 1");
  for (double e : eps_levels)
    if (!(e > 0.0) || !(e < 1.0))
      throw std::invalid_argument("experiment config: confidence levels must lie in (0, 1)");
  if (threads < 1) throw std::invalid_argument("experiment config: threads must be >= 1");
}

namespace {

DistributionSpec spec_from_config(const KvFile& file) {
  const KvSection& spec_sec = file.require("spec");
  if (const auto path = spec_sec.get("file")) {
    std::ifstream in(*path);
    if (!in) throw std::runtime_error("experiment config: cannot open spec file " + *path);
    std::stringstream ss;
    ss << in.rdbuf();
    return DistributionSpec::deserialize(ss.str());
  }
  KvFile only;
  only.sections.push_back(spec_sec);
  only.sections.back().name = "spec";
  return DistributionSpec::deserialize(only.render());
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(const KvFile& file) {
  ExperimentConfig cfg(spec_from_config(file));

  const KvSection& est_sec = file.require("estimators");
  for (const std::string& line : est_sec.get_all("estimator"))
    cfg.estimators.push_back(EstimatorSpec::parse(line));

  const KvSection& grid = file.require("grid");
  const Eigen::VectorXd ns = kv_to_vector(grid.require("n"));
  for (Eigen::Index i = 0; i < ns.size(); ++i) {
    const double v = ns[i];
    if (v != std::floor(v)) throw std::invalid_argument("experiment config: n must be integral");
    cfg.sample_sizes.push_back(static_cast<int>(v));
  }
  cfg.replications = static_cast<int>(kv_to_int(grid.get_or("replications", "1")));
  const Eigen::VectorXd eps = kv_to_vector(grid.get_or("eps", "0.05"));
  cfg.eps_levels.assign(eps.data(), eps.data() + eps.size());

  if (const KvSection* out = file.find("output")) {
    cfg.out_path = out->get_or("path", "");
    cfg.master_seed = static_cast<std::uint64_t>(kv_to_int(out->get_or("seed", "1")));
    cfg.threads = static_cast<int>(kv_to_int(out->get_or("threads", "1")));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(KvFile::parse_file(path));
}

FitOutcome fit_estimator(const EstimatorSpec& estimator, const Dataset& data,
                         const FeatureMap& fmap, const ParamBox* box,
                         const DistributionSpec* spec, std::uint64_t seed) {
  FitOutcome out;
  const std::string& id = estimator.id;
  const auto require_box = [&]() -> const ParamBox& {
    if (box == nullptr)
      throw std::invalid_argument(id + ": needs a parameter box (none in the data source)");
    return *box;
  };
  if (id == "ols") {
    out.theta = ols_fit(data, fmap).model.theta;
  } else if (id == "ols-trunc") {
    out.theta = ols_fit(data, fmap).model.theta;
    const auto it = estimator.params.find("clip");
    if (it != estimator.params.end()) {
      out.clip_bound = it->second;
    } else if (spec != nullptr) {
      out.clip_bound = spec->regression_sup();
    } else {
      throw std::invalid_argument("ols-trunc: pass clip=... when fitting raw data");
    }
    if (!std::isfinite(out.clip_bound))
      throw std::domain_error("ols-trunc: regression sup is unbounded; pass clip=...");
    out.clipped = true;
  } else if (id == "ridge") {
    const auto it = estimator.params.find("lambda");
    if (it == estimator.params.end())
      throw std::invalid_argument("ridge: missing lambda parameter");
    out.theta = ridge_fit(data, fmap, it->second).theta;
  } else if (id == "projection") {
    out.theta = projection_fit(data, fmap).theta;
  } else if (id == "erm-box") {
    out.theta = erm_box_fit(data, fmap, require_box()).theta;
  } else {
    const ParamBox& b = require_box();
    PosteriorConfig pc;
    if (estimator.params.count("lambda")) {
      pc.lambda = estimator.params.at("lambda");
    } else if (spec != nullptr) {
      pc.lambda = PosteriorConfig::default_lambda(sigma_sup_conditional(*spec, b),
                                                  linf_diameter_bound(b, fmap));
    } else {
      throw std::invalid_argument(id + ": pass lambda=... when fitting raw data");
    }
    pc.chain_length = static_cast<int>(estimator.param_or("chain", 4000));
    pc.burn_in = static_cast<int>(estimator.param_or("burnin", 1000));
    pc.thin = static_cast<int>(estimator.param_or("thin", 1));
    pc.seed = seed;
    if (id == "gibbs") {
      const Eigen::MatrixXd X = design_matrix(fmap, data);
      const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
          data.outputs.data(), static_cast<Eigen::Index>(data.outputs.size()));
      const double lambda = pc.lambda;
      const ChainResult chain = mh_sample(
          [&](const Eigen::VectorXd& t) { return -lambda * (y - X * t).squaredNorm(); }, b, pc);
      out.theta = chain.final_draw();
      out.accept_rate = chain.acceptance_rate;
    } else if (id == "trunc-pacbayes" || id == "trunc-pacbayes-mean") {
      pc.prior_samples = static_cast<int>(estimator.param_or("m", 256));
      pc.mirror_truncation = estimator.param_or("mirror", 0.0) != 0.0;
      const PriorSampleSet prior = PriorSampleSet::generate(b, pc.prior_samples,
                                                            derive_seed(seed, {hash_tag("prior")}));
      const TruncatedTilt tilt(data, fmap, pc.lambda, prior, pc.mirror_truncation);
      const ChainResult chain =
          mh_sample([&](const Eigen::VectorXd& t) { return tilt.log_density(t); }, b, pc);
      out.theta = id == "trunc-pacbayes-mean" ? posterior_mean(chain).theta : chain.final_draw();
      out.accept_rate = chain.acceptance_rate;
    } else {
      throw std::invalid_argument("unknown estimator id: " + id);
    }
  }
  return out;
}

ReplicationResult run_replication(const DistributionSpec& spec, const RiskOracle& oracle,
                                  const EstimatorSpec& estimator, int n,
                                  std::uint64_t master_seed, int rep) {
  ReplicationResult out;
  out.estimator = estimator.label();
  out.n = n;
  out.rep = rep;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    // The dataset stream depends only on (master, n, rep): every estimator
    // sees the same sample, so comparisons are paired.
    const std::uint64_t data_seed =
        derive_seed(master_seed, {hash_tag("dataset"), static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(rep)});
    const std::uint64_t est_seed =
        derive_seed(master_seed, {hash_tag(out.estimator), static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(rep)});
    const Dataset data = spec.sample(n, data_seed);
    const FeatureMap fmap = spec.feature_map();
    const ParamBox& box = spec.box();

    const FitOutcome fit = fit_estimator(estimator, data, fmap, &box, &spec, est_seed);
    out.accept_rate = fit.accept_rate;
    out.excess_risk = fit.clipped
                          ? clipped_predictor_risk(spec, fit.theta, fit.clip_bound) - oracle.risk_star
                          : oracle.excess(fit.theta);
  } catch (const std::exception& e) {
    out.failed = true;
    out.excess_risk = std::numeric_limits<double>::quiet_NaN();
    out.error = std::string(e.what()) + " [master_seed=" + std::to_string(master_seed) +
                " n=" + std::to_string(n) + " rep=" + std::to_string(rep) + "]";
  }
  out.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_of: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double quantile_of(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile_of: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_of: q must lie in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<long>(xs.size());
  const long idx = std::clamp(static_cast<long>(std::ceil(q * n)) - 1, 0L, n - 1);
  return xs[static_cast<std::size_t>(idx)];
}

Report run_experiment(const ExperimentConfig& config) {
  config.validate();
  const RiskOracle oracle = make_risk_oracle(config.spec);

  struct Task {
    int est;
    int n;
    int rep;
  };
  std::vector<Task> tasks;
  for (int e = 0; e < static_cast<int>(config.estimators.size()); ++e)
    for (int n : config.sample_sizes)
      for (int r = 0; r < config.replications; ++r) tasks.push_back({e, n, r});

  // Each worker claims task indices from a shared counter and writes into a
  // preallocated slot, so the gathered order is (estimator, n, rep)
  // regardless of scheduling.
  std::vector<ReplicationResult> results(tasks.size());
  const auto run_task = [&](std::size_t i) {
    const Task& t = tasks[i];
    results[i] =
        run_replication(config.spec, oracle, config.estimators[t.est], t.n, config.master_seed,
                        t.rep);
  };
  const int workers = std::min<int>(config.threads, static_cast<int>(tasks.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
          run_task(i);
      });
    for (std::thread& th : pool) th.join();
  }

  Report report;
  report.header.push_back("excess risk is exact (moment oracle), never a test-set estimate");
  report.header.push_back(
      "seeding: dataset stream = chain-mix(master, tag(\"dataset\"), n, rep), shared by all "
      "estimators; estimator stream = chain-mix(master, tag(label), n, rep)");
  report.header.push_back("master_seed = " + std::to_string(config.master_seed));
  std::string spec_line = config.spec.serialize();
  std::replace(spec_line.begin(), spec_line.end(), '\n', ' ');
  report.header.push_back("spec: " + spec_line);
  report.replications = results;

  const int d = config.spec.feature_map().dim();
  for (const EstimatorSpec& est : config.estimators) {
    const std::string label = est.label();
    for (int n : config.sample_sizes) {
      std::vector<double> xs, accepts;
      long failed = 0;
      for (const ReplicationResult& r : results) {
        if (r.estimator != label || r.n != n) continue;
        if (r.failed) {
          ++failed;
          continue;
        }
        xs.push_back(r.excess_risk);
        if (std::isfinite(r.accept_rate)) accepts.push_back(r.accept_rate);
      }
      auto add = [&](const std::string& stat, double value) {
        report.aggregates.push_back({label, n, stat, value});
      };
      if (!xs.empty()) {
        add("mean", mean_of(xs));
        add("median", quantile_of(xs, 0.5));
        add("q90", quantile_of(xs, 0.9));
        add("q95", quantile_of(xs, 0.95));
        add("q99", quantile_of(xs, 0.99));
      }
      if (!accepts.empty()) add("accept_rate_mean", mean_of(accepts));
      if (failed > 0) add("n_failed", static_cast<double>(failed));
      if (config.spec.variant() == DistributionSpec::Variant::Hypercube)
        add("minimax_benchmark", 1.0 / (4.0 * std::sqrt(static_cast<double>(n))));

      // Audit the high-probability excess-risk bound for the truncated
      // posterior whenever its hypotheses hold for this spec.
      if ((est.id == "trunc-pacbayes" || est.id == "trunc-pacbayes-mean") && !xs.empty()) {
        double sigma = 0.0, H = 0.0;
        bool hypotheses = true;
        try {
          sigma = sigma_sup_conditional(config.spec, config.spec.box());
          H = linf_diameter_bound(config.spec.box(), config.spec.feature_map());
        } catch (const std::exception&) {
          hypotheses = false;
        }
        const double lambda = est.params.count("lambda")
                                  ? est.params.at("lambda")
                                  : (hypotheses ? PosteriorConfig::default_lambda(sigma, H) : 0.0);
        const double eta = lambda * bounded_noise_variance_factor(sigma, H);
        hypotheses = hypotheses && std::isfinite(sigma) && std::isfinite(H) && eta > 0.0 &&
                     eta < 1.0 && kDefaultEtaPrime < 1.0 - eta;
        if (hypotheses) {
          const PacBayesConstants c =
              trunc_risk_constants(sigma, H, lambda, kDefaultEtaPrime);
          for (double eps : config.eps_levels) {
            const double bound = risk_bound(c, static_cast<double>(d), eps, n);
            long violations = 0;
            for (double x : xs)
              if (x > bound) ++violations;
            const double freq = static_cast<double>(violations) / xs.size();
            add("bound[eps=" + kv_from_double(eps) + "]", bound);
            add("violation[eps=" + kv_from_double(eps) + "]", freq);

            MarginReport m;
            m.name = "trunc-posterior-risk-bound";
            json p;
            p["estimator"] = label;
            p["n"] = n;
            p["eps"] = eps;
            p["sigma"] = sigma;
            p["H"] = H;
            p["lambda"] = lambda;
            p["D"] = d;
            p["R"] = xs.size();
            m.params = p.dump();
            m.lhs = freq;
            m.rhs = eps + 3.0 * std::sqrt(eps * (1.0 - eps) / xs.size());
            m.pass = m.lhs <= m.rhs;
            m.note = "empirical violation frequency vs audited confidence level";
            report.bounds.push_back(std::move(m));
          }
        }
      }
    }
  }
  return report;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  return kv_from_double(v);
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("emit_report: cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("emit_report: write failed for " + path);
}

}  // namespace

void emit_report(const Report& report, const std::string& path_prefix) {
  if (path_prefix.empty()) throw std::invalid_argument("emit_report: empty output path");
  std::string reps;
  for (const std::string& line : report.header) reps += "# " + line + "\n";
  reps += "estimator,n,rep,excess_risk,accept_rate,wall_ms\n";
  for (const ReplicationResult& r : report.replications) {
    reps += csv_field(r.estimator) + "," + std::to_string(r.n) + "," + std::to_string(r.rep) +
            "," + csv_double(r.excess_risk) + "," +
            (std::isnan(r.accept_rate) ? "" : kv_from_double(r.accept_rate)) + "," +
            kv_from_double(r.wall_ms) + "\n";
  }
  for (const ReplicationResult& r : report.replications)
    if (r.failed)
      reps += "# failed: " + csv_field(r.estimator) + " n=" + std::to_string(r.n) +
              " rep=" + std::to_string(r.rep) + ": " + r.error + "\n";
  write_file(path_prefix + "_reps.csv", reps);

  std::string summary;
  for (const std::string& line : report.header) summary += "# " + line + "\n";
  summary += "estimator,n,stat,value\n";
  for (const AggregateRow& a : report.aggregates)
    summary += csv_field(a.estimator) + "," + std::to_string(a.n) + "," + csv_field(a.stat) +
               "," + csv_double(a.value) + "\n";
  write_file(path_prefix + "_summary.csv", summary);

  std::string bounds;
  for (const std::string& line : report.header) bounds += "# " + line + "\n";
  bounds += "theorem,param_json,lhs,rhs,margin,pass\n";
  for (const MarginReport& m : report.bounds)
    bounds += csv_field(m.name) + "," + csv_field(m.params) + "," + csv_double(m.lhs) + "," +
              csv_double(m.rhs) + "," + csv_double(m.margin()) + "," + (m.pass ? "1" : "0") +
              "\n";
  write_file(path_prefix + "_bounds.csv", bounds);
}

std::vector<ReplicationResult> read_replications_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_replications_csv: cannot open " + path);
  std::vector<ReplicationResult> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "estimator,n,rep,excess_risk,accept_rate,wall_ms")
        throw std::runtime_error("read_replications_csv: unexpected header in " + path);
      header_seen = true;
      continue;
    }
    // split into 6 fields, honoring a quoted first field
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (pos <= line.size() && fields.size() < 6) {
      std::string field;
      if (pos < line.size() && line[pos] == '"') {
        ++pos;
        while (pos < line.size()) {
          if (line[pos] == '"' && pos + 1 < line.size() && line[pos + 1] == '"') {
            field += '"';
            pos += 2;
          } else if (line[pos] == '"') {
            ++pos;
            break;
          } else {
            field += line[pos++];
          }
        }
      } else {
        while (pos < line.size() && line[pos] != ',') field += line[pos++];
      }
      fields.push_back(field);
      if (pos < line.size() && line[pos] == ',') ++pos;
      else if (pos >= line.size()) break;
    }
    if (fields.size() != 6)
      throw std::runtime_error("read_replications_csv: malformed row '" + line + "'");
    ReplicationResult r;
    r.estimator = fields[0];
    r.n = static_cast<int>(kv_to_int(fields[1]));
    r.rep = static_cast<int>(kv_to_int(fields[2]));
    r.excess_risk = fields[3] == "nan" ? std::numeric_limits<double>::quiet_NaN()
                                       : kv_to_double(fields[3]);
    r.accept_rate = fields[4].empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : kv_to_double(fields[4]);
    r.wall_ms = kv_to_double(fields[5]);
    r.failed = fields[3] == "nan";
    out.push_back(std::move(r));
  }
  if (!header_seen) throw std::runtime_error("read_replications_csv: missing header in " + path);
  return out;
}

}  // namespace robustreg
