#include "robustreg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "robustreg/bounds.hpp"
#include "robustreg/experiment.hpp"
#include "robustreg/kvconfig.hpp"
#include "robustreg/model.hpp"
#include "robustreg/posterior.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/synthetic.hpp"
#include "robustreg/truncation.hpp"

namespace robustreg {

namespace {

std::string sig3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// --threads beats the ROBUSTREG_THREADS environment variable, which beats
/// the config-file / default value.
int resolve_threads(bool cli_given, int cli_value, int fallback) {
  if (cli_given) return cli_value;
  if (const char* env = std::getenv("ROBUSTREG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return fallback;
}

std::vector<double> parse_eps_list(const std::string& text) {
  const Eigen::VectorXd v = kv_to_vector(text);
  std::vector<double> out(v.data(), v.data() + v.size());
  for (double e : out)
    if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("eps levels must lie in (0,1)");
  if (out.empty()) throw std::invalid_argument("empty eps list");
  return out;
}

// ---------------------------------------------------------------------------
// fit: dataset files
// ---------------------------------------------------------------------------

struct LoadedData {
  Dataset data;
  FeatureMap fmap = FeatureMap::partition_indicators(1);
  std::optional<ParamBox> box;
};

/// Key-value dataset format, one [data] section:
///   features = raw | cells | scaled-cells   (default raw)
///   dim = <int>              raw coordinate count / cell count
///   cell_probs = p1,...,pd   (scaled-cells only; defines dim)
///   sup_bounds = s1,...,sd   (raw only; default: column-wise max |x_j|)
///   box_lo = ...,  box_hi = ...   optional parameter box (both or neither)
///   row = x1,...,xd,y        (raw)     or     row = cell,y  (cell-based)
LoadedData load_dataset_file(const std::string& path) {
  const KvFile file = KvFile::parse_file(path);
  const KvSection& sec = file.require("data");
  const std::string features = sec.get_or("features", "raw");
  const std::vector<std::string> rows = sec.get_all("row");
  if (rows.empty()) throw std::runtime_error(path + ": no `row =` entries");

  LoadedData out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.data.outputs.resize(n);

  if (features == "raw") {
    Eigen::VectorXd first = kv_to_vector(rows.front());
    const int dim = sec.has("dim") ? static_cast<int>(kv_to_int(sec.require("dim")))
                                   : static_cast<int>(first.size()) - 1;
    if (dim < 1) throw std::runtime_error(path + ": rows need at least one coordinate plus y");
    Eigen::VectorXd sup = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd r = kv_to_vector(rows[static_cast<std::size_t>(i)]);
      if (r.size() != dim + 1)
        throw std::runtime_error(path + ": row " + std::to_string(i) + " has " +
                                 std::to_string(r.size()) + " fields, expected " +
                                 std::to_string(dim + 1));
      out.data.inputs.push_back(InputPoint::from_coords(r.head(dim)));
      out.data.outputs[i] = r[dim];
      sup = sup.cwiseMax(r.head(dim).cwiseAbs());
    }
    if (const auto s = sec.get("sup_bounds")) sup = kv_to_vector(*s);
    if (sup.size() != dim) throw std::runtime_error(path + ": sup_bounds has wrong length");
    out.fmap = FeatureMap::raw_coordinates(dim, sup);
  } else if (features == "cells" || features == "scaled-cells") {
    FeatureMap fmap = FeatureMap::partition_indicators(1);
    if (features == "cells") {
      fmap = FeatureMap::partition_indicators(static_cast<int>(kv_to_int(sec.require("dim"))));
    } else {
      fmap = FeatureMap::scaled_indicators(kv_to_vector(sec.require("cell_probs")));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd r = kv_to_vector(rows[static_cast<std::size_t>(i)]);
      if (r.size() != 2)
        throw std::runtime_error(path + ": cell rows are `cell,y`; row " + std::to_string(i) +
                                 " has " + std::to_string(r.size()) + " fields");
      const double cell = r[0];
      if (cell != std::floor(cell) || cell < 0 || cell >= fmap.dim())
        throw std::runtime_error(path + ": row " + std::to_string(i) + " cell index out of range");
      out.data.inputs.push_back(InputPoint::from_cell(static_cast<std::int32_t>(cell)));
      out.data.outputs[i] = r[1];
    }
    out.fmap = fmap;
  } else {
    throw std::runtime_error(path + ": unknown features kind `" + features + "`");
  }

  const bool has_lo = sec.has("box_lo"), has_hi = sec.has("box_hi");
  if (has_lo != has_hi) throw std::runtime_error(path + ": box_lo and box_hi come together");
  if (has_lo) {
    ParamBox box(kv_to_vector(sec.require("box_lo")), kv_to_vector(sec.require("box_hi")));
    if (box.dim() != out.fmap.dim())
      throw std::runtime_error(path + ": box dimension does not match the feature dimension");
    out.box = box;
  }
  return out;
}

/// Empirical squared risk of the (possibly clipped) fitted predictor.
double fitted_empirical_risk(const FitOutcome& fit, const FeatureMap& fmap, const Dataset& data) {
  const LinearModel model{fit.theta};
  if (!fit.clipped) return empirical_risk(model, fmap, data);
  double s = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double pred = std::clamp(predict(model, fmap, data.inputs[static_cast<std::size_t>(i)]),
                                   -fit.clip_bound, fit.clip_bound);
    const double diff = data.outputs[i] - pred;
    s += diff * diff;
  }
  return s / data.n();
}

int run_fit(const std::string& estimator_text, const std::string& spec_path,
            const std::string& data_path, int n, std::uint64_t seed, const std::string& out_path) {
  if (spec_path.empty() == data_path.empty()) {
    std::cerr << "fit: pass exactly one of --spec or --data\n";
    return 2;
  }
  const EstimatorSpec est = EstimatorSpec::parse(estimator_text);

  std::ostringstream report;
  if (!spec_path.empty()) {
    if (n < 2) {
      std::cerr << "fit: --spec needs --n >= 2\n";
      return 2;
    }
    const DistributionSpec spec = DistributionSpec::deserialize(read_text_file(spec_path));
    const RiskOracle oracle = make_risk_oracle(spec);
    const FeatureMap fmap = spec.feature_map();
    // Same streams as replication 0 of an experiment with this master seed.
    const std::uint64_t data_seed =
        derive_seed(seed, {hash_tag("dataset"), static_cast<std::uint64_t>(n), 0});
    const std::uint64_t est_seed =
        derive_seed(seed, {hash_tag(est.label()), static_cast<std::uint64_t>(n), 0});
    const Dataset data = spec.sample(n, data_seed);
    const FitOutcome fit = fit_estimator(est, data, fmap, &spec.box(), &spec, est_seed);

    const double true_risk = fit.clipped ? clipped_predictor_risk(spec, fit.theta, fit.clip_bound)
                                         : oracle.risk(fit.theta);
    report << "estimator = " << est.label() << "\n";
    report << "n = " << n << "\n";
    report << "seed = " << seed << "\n";
    report << "theta = " << kv_from_vector(fit.theta) << "\n";
    if (fit.clipped) report << "clip_bound = " << kv_from_double(fit.clip_bound) << "\n";
    if (std::isfinite(fit.accept_rate))
      report << "accept_rate = " << kv_from_double(fit.accept_rate) << "\n";
    report << "empirical_risk = " << kv_from_double(fitted_empirical_risk(fit, fmap, data)) << "\n";
    report << "true_risk = " << kv_from_double(true_risk) << "\n";
    report << "excess_risk = " << kv_from_double(true_risk - oracle.risk_star) << "\n";
  } else {
    const LoadedData loaded = load_dataset_file(data_path);
    const std::uint64_t est_seed = derive_seed(
        seed, {hash_tag(est.label()), static_cast<std::uint64_t>(loaded.data.n()), 0});
    const FitOutcome fit = fit_estimator(est, loaded.data, loaded.fmap,
                                         loaded.box ? &*loaded.box : nullptr, nullptr, est_seed);
    report << "estimator = " << est.label() << "\n";
    report << "n = " << loaded.data.n() << "\n";
    report << "seed = " << seed << "\n";
    report << "theta = " << kv_from_vector(fit.theta) << "\n";
    if (fit.clipped) report << "clip_bound = " << kv_from_double(fit.clip_bound) << "\n";
    if (std::isfinite(fit.accept_rate))
      report << "accept_rate = " << kv_from_double(fit.accept_rate) << "\n";
    report << "empirical_risk = "
           << kv_from_double(fitted_empirical_risk(fit, loaded.fmap, loaded.data)) << "\n";
  }

  std::cout << report.str();
  if (!out_path.empty()) write_text_file(out_path, report.str());
  return 0;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

int run_experiment_cmd(const std::string& config_path, bool seed_given, std::uint64_t seed,
                       bool threads_given, int threads, const std::string& out_path) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  if (seed_given) cfg.master_seed = seed;
  cfg.threads = resolve_threads(threads_given, threads, cfg.threads);
  if (!out_path.empty()) cfg.out_path = out_path;
  if (cfg.out_path.empty()) {
    std::cerr << "experiment: no output path (set [output] path in the config or pass --out)\n";
    return 2;
  }

  const Report report = run_experiment(cfg);
  emit_report(report, cfg.out_path);

  long failed = 0;
  for (const ReplicationResult& r : report.replications)
    if (r.failed) ++failed;
  std::cout << "wrote " << cfg.out_path << "_reps.csv (" << report.replications.size()
            << " rows)\n";
  std::cout << "wrote " << cfg.out_path << "_summary.csv\n";
  std::cout << "wrote " << cfg.out_path << "_bounds.csv\n";
  if (failed > 0)
    std::cerr << "warning: " << failed
              << " replication(s) failed; see trailing comments in the reps file\n";

  std::cout << "\nexcess-risk summary (mean / median / q95):\n";
  for (const EstimatorSpec& est : cfg.estimators) {
    for (int n : cfg.sample_sizes) {
      double mean = std::numeric_limits<double>::quiet_NaN(), median = mean, q95 = mean;
      for (const AggregateRow& a : report.aggregates) {
        if (a.estimator != est.label() || a.n != n) continue;
        if (a.stat == "mean") mean = a.value;
        if (a.stat == "median") median = a.value;
        if (a.stat == "q95") q95 = a.value;
      }
      std::cout << "  " << est.label() << "  n=" << n << "  " << sig3(mean) << " / "
                << sig3(median) << " / " << sig3(q95) << "\n";
    }
  }
  if (!report.bounds.empty()) {
    std::cout << "\nbound audits (violation freq vs audited level):\n";
    for (const MarginReport& m : report.bounds)
      std::cout << "  " << m.name << "  lhs=" << sig3(m.lhs) << " rhs=" << sig3(m.rhs) << "  "
                << (m.pass ? "pass" : "FAIL") << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
  const std::vector<std::string> suites = verify_suites();
  if (suite != "all" && std::find(suites.begin(), suites.end(), suite) == suites.end()) {
    std::cerr << "verify: unknown suite `" << suite << "`; available: all";
    for (const std::string& s : suites) std::cerr << ", " << s;
    std::cerr << "\n";
    return 2;
  }

  const std::vector<MarginReport> reports = verify_battery(suite, seed);
  std::size_t width = 4;
  for (const MarginReport& m : reports) width = std::max(width, m.name.size());
  long failures = 0;
  for (const MarginReport& m : reports) {
    if (!m.pass) ++failures;
    std::cout << (m.pass ? "pass  " : "FAIL  ") << m.name
              << std::string(width - m.name.size() + 2, ' ') << "lhs=" << kv_from_double(m.lhs)
              << "  rhs=" << kv_from_double(m.rhs) << "  margin=" << sig3(m.margin());
    if (!m.note.empty()) std::cout << "  (" << m.note << ")";
    std::cout << "\n";
  }
  std::cout << reports.size() << " checks, " << failures << " failed\n";

  if (!out_path.empty()) {
    std::ostringstream csv;
    csv << "theorem,param_json,lhs,rhs,margin,pass\n";
    for (const MarginReport& m : reports)
      csv << csv_escape(m.name) << "," << csv_escape(m.params) << "," << kv_from_double(m.lhs)
          << "," << kv_from_double(m.rhs) << "," << kv_from_double(m.margin()) << ","
          << (m.pass ? 1 : 0) << "\n";
    write_text_file(out_path, csv.str());
    std::cout << "wrote " << out_path << "\n";
  }
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// mean-demo
// ---------------------------------------------------------------------------

int run_mean_demo(double nu, int n, int reps, const std::string& eps_text, bool raw_scale,
                  std::uint64_t seed, const std::string& out_path) {
  if (nu <= 2.0) {
    std::cerr << "mean-demo: need nu > 2 (finite variance)\n";
    return 2;
  }
  if (n < 2 || reps < 1) {
    std::cerr << "mean-demo: need n >= 2 and reps >= 1\n";
    return 2;
  }
  const std::vector<double> eps = parse_eps_list(eps_text);
  // Rescale so E Y^2 = 1 (the deviation guarantee's normalization);
  // a standard t(nu) has second moment nu/(nu-2).
  const double scale = raw_scale ? 1.0 : std::sqrt((nu - 2.0) / nu);

  std::vector<double> emp_dev(static_cast<std::size_t>(reps));
  std::vector<std::vector<double>> rob_dev(eps.size(),
                                           std::vector<double>(static_cast<std::size_t>(reps)));
  Eigen::VectorXd y(n);
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, {hash_tag("mean-demo"), static_cast<std::uint64_t>(r)}));
    for (int i = 0; i < n; ++i) y[i] = scale * rng.student_t(nu);
    emp_dev[static_cast<std::size_t>(r)] = std::abs(empirical_mean(y));  // true mean is 0
    for (std::size_t j = 0; j < eps.size(); ++j)
      rob_dev[j][static_cast<std::size_t>(r)] = std::abs(robust_mean(y, eps[j]));
  }

  std::ostringstream csv;
  csv << "metric,eps,value\n";
  std::cout << "soft-truncated vs empirical mean: t(" << kv_from_double(nu) << ") scaled by "
            << kv_from_double(scale) << ", n=" << n << ", reps=" << reps << "\n\n";
  std::cout << "  eps        threshold   robust_viol  empirical_viol  audit(2eps+3se)\n";
  for (std::size_t j = 0; j < eps.size(); ++j) {
    const double thr = robust_mean_deviation(eps[j], n);
    long rv = 0, ev = 0;
    for (int r = 0; r < reps; ++r) {
      if (rob_dev[j][static_cast<std::size_t>(r)] > thr) ++rv;
      if (emp_dev[static_cast<std::size_t>(r)] > thr) ++ev;
    }
    const double rfreq = static_cast<double>(rv) / reps;
    const double efreq = static_cast<double>(ev) / reps;
    const double audit = 2.0 * eps[j] + 3.0 * std::sqrt(2.0 * eps[j] / reps);
    const auto pad = [](std::string s, std::size_t w) {
      if (s.size() < w) s.append(w - s.size(), ' ');
      return s;
    };
    std::cout << "  " << pad(sig3(eps[j]), 11) << pad(sig3(thr), 12) << pad(sig3(rfreq), 13)
              << pad(sig3(efreq), 16) << sig3(audit) << "\n";
    csv << "threshold," << kv_from_double(eps[j]) << "," << kv_from_double(thr) << "\n";
    csv << "robust_violation_freq," << kv_from_double(eps[j]) << "," << kv_from_double(rfreq)
        << "\n";
    csv << "empirical_violation_freq," << kv_from_double(eps[j]) << "," << kv_from_double(efreq)
        << "\n";
    csv << "audit_bound," << kv_from_double(eps[j]) << "," << kv_from_double(audit) << "\n";
  }

  std::cout << "\n  deviation quantiles |estimate - mean|:\n";
  std::cout << "  q        empirical";
  for (double e : eps) std::cout << "   robust@" << sig3(e);
  std::cout << "\n";
  for (double q : {0.9, 0.99, 0.999}) {
    std::cout << "  " << q << "    " << sig3(quantile_of(emp_dev, q));
    csv << "empirical_q" << kv_from_double(q) << ",," << kv_from_double(quantile_of(emp_dev, q))
        << "\n";
    for (std::size_t j = 0; j < eps.size(); ++j) {
      std::cout << "      " << sig3(quantile_of(rob_dev[j], q));
      csv << "robust_q" << kv_from_double(q) << "," << kv_from_double(eps[j]) << ","
          << kv_from_double(quantile_of(rob_dev[j], q)) << "\n";
    }
    std::cout << "\n";
  }

  if (!out_path.empty()) {
    write_text_file(out_path, csv.str());
    std::cout << "\nwrote " << out_path << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

int run_constants(bool sigma_given, double sigma, bool H_given, double H, bool lambda_given,
                  double lambda, double eta_prime, bool V_given, double V, double G, bool D_given,
                  double D, bool eps_given, double eps, bool n_given, long n) {
  PacBayesConstants c;
  if (V_given) {
    if (!lambda_given) {
      std::cerr << "constants: --V needs an explicit --lambda (no default rule without sigma/H)\n";
      return 2;
    }
    c = variance_risk_constants(V, G, lambda, eta_prime);
  } else {
    if (!sigma_given || !H_given) {
      std::cerr << "constants: pass --sigma and --H (or --V with --lambda)\n";
      return 2;
    }
    const double lam =
        lambda_given ? lambda : 0.32 / bounded_noise_variance_factor(sigma, H);
    c = trunc_risk_constants(sigma, H, lam, eta_prime);
    std::cout << "sigma = " << kv_from_double(sigma) << "\nH = " << kv_from_double(H) << "\n";
    if (!lambda_given) std::cout << "lambda rule: 0.32 (2 sigma + H)^-2\n";
  }
  std::cout << "lambda = " << kv_from_double(c.lambda) << "\n";
  std::cout << "V = " << kv_from_double(c.V) << "  (variance factor)\n";
  std::cout << "G = " << kv_from_double(c.G) << "\n";
  std::cout << "eta = " << kv_from_double(c.eta) << "\neta_prime = " << kv_from_double(c.eta_prime)
            << "\n";
  std::cout << "C1 = " << sig3(c.C1) << "  (" << kv_from_double(c.C1) << ")\n";
  std::cout << "C2 = " << sig3(c.C2) << "  (" << kv_from_double(c.C2) << ")\n";
  std::cout << "C1/2 = " << sig3(0.5 * c.C1)
            << "  (half-complexity coefficient, unconstrained interior optimum)\n";
  std::cout << "rate: V (C1 D + C2 log(2 sqrt(G)/eps)) / n\n";
  if (n_given) {
    std::cout << "gamma(n) = " << kv_from_double(c.gamma(n))
              << "\ngamma*(n) = " << kv_from_double(c.gamma_star(n)) << "\n";
  }
  if (D_given && eps_given && n_given) {
    std::cout << "bound(D=" << kv_from_double(D) << ", eps=" << kv_from_double(eps) << ", n=" << n
              << ") = " << kv_from_double(risk_bound(c, D, eps, n)) << "\n";
  }
  return 0;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{
      "robustreg: soft-truncated posterior regression for heavy-tailed noise —\n"
      "estimators, baselines, synthetic benchmarks, and finite-sample bound audits"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_path;
  CLI::Option* seed_opt = app.add_option("--seed", seed, "master seed (default 1)");
  CLI::Option* threads_opt =
      app.add_option("--threads", threads, "worker threads (beats ROBUSTREG_THREADS)");
  app.add_option("--out", out_path, "output path (subcommand-specific)");

  // fit
  CLI::App* fit = app.add_subcommand("fit", "fit one estimator on a spec sample or a dataset file");
  fit->fallthrough();
  std::string est_text = "ols", spec_path, data_path;
  int fit_n = 0;
  fit->add_option("--estimator", est_text,
                  "estimator id(params), e.g. trunc-pacbayes(lambda=0.5,m=256)");
  fit->add_option("--spec", spec_path, "distribution spec file (draws a sample; exact risks)");
  fit->add_option("--n", fit_n, "sample size for --spec mode");
  fit->add_option("--data", data_path, "dataset file (key-value format; empirical risk only)");

  // experiment
  CLI::App* exp = app.add_subcommand("experiment", "replicated estimator runs -> three CSVs");
  exp->fallthrough();
  std::string config_path;
  exp->add_option("--config", config_path, "experiment config file")->required();

  // verify
  CLI::App* verify = app.add_subcommand(
      "verify", "run the bound/identity check battery; exit 1 on any failed margin");
  verify->fallthrough();
  std::string suite = "all";
  {
    std::string help = "suite to run: all";
    for (const std::string& s : verify_suites()) help += ", " + s;
    verify->add_option("--suite", suite, help);
  }

  // mean-demo
  CLI::App* demo = app.add_subcommand(
      "mean-demo", "soft-truncated vs empirical mean deviation study on student-t data");
  demo->fallthrough();
  double demo_nu = 2.5;
  int demo_n = 200, demo_reps = 10000;
  std::string demo_eps = "0.05,0.01,0.001";
  bool demo_raw = false;
  demo->add_option("--nu", demo_nu, "degrees of freedom (> 2)");
  demo->add_option("--n", demo_n, "sample size per replication");
  demo->add_option("--reps", demo_reps, "replications");
  demo->add_option("--eps", demo_eps, "comma-separated confidence levels");
  demo->add_flag("--raw-scale", demo_raw, "skip rescaling the noise to unit second moment");

  // constants
  CLI::App* cons = app.add_subcommand(
      "constants", "print the excess-risk bound constants C1, C2 for given parameters");
  cons->fallthrough();
  double c_sigma = 0.0, c_H = 0.0, c_lambda = 0.0, c_eta_prime = 0.18, c_V = 0.0, c_G = 1.0,
         c_D = 0.0, c_eps = 0.0;
  long c_n = 0;
  CLI::Option* sigma_opt = cons->add_option("--sigma", c_sigma, "conditional noise level");
  CLI::Option* H_opt = cons->add_option("--H", c_H, "sup-norm diameter of the class");
  CLI::Option* lambda_opt =
      cons->add_option("--lambda", c_lambda, "influence scale (default rule 0.32 (2 sigma+H)^-2)");
  cons->add_option("--eta-prime", c_eta_prime, "free tuning parameter in (0, 1-eta)");
  CLI::Option* V_opt =
      cons->add_option("--V", c_V, "variance factor (alternative to --sigma/--H)");
  cons->add_option("--G", c_G, "prior-complexity growth constant (default 1)");
  CLI::Option* D_opt = cons->add_option("--D", c_D, "complexity dimension for a bound value");
  CLI::Option* eps_opt = cons->add_option("--eps", c_eps, "confidence level for a bound value");
  CLI::Option* n_opt = cons->add_option("--n", c_n, "sample size for a bound value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and the usage hint
    return 2;
  }

  try {
    if (fit->parsed())
      return run_fit(est_text, spec_path, data_path, fit_n, seed, out_path);
    if (exp->parsed())
      return run_experiment_cmd(config_path, seed_opt->count() > 0, seed, threads_opt->count() > 0,
                                threads, out_path);
    if (verify->parsed()) return run_verify(suite, seed, out_path);
    if (demo->parsed())
      return run_mean_demo(demo_nu, demo_n, demo_reps, demo_eps, demo_raw, seed, out_path);
    if (cons->parsed())
      return run_constants(sigma_opt->count() > 0, c_sigma, H_opt->count() > 0, c_H,
                           lambda_opt->count() > 0, c_lambda, c_eta_prime, V_opt->count() > 0, c_V,
                           c_G, D_opt->count() > 0, c_D, eps_opt->count() > 0, c_eps,
                           n_opt->count() > 0, c_n);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "no subcommand\n";
  return 2;
}

}  // namespace robustreg
