// Tests for the command-line front end: argument validation and exit codes,
// the constants table, the verify battery, single fits from spec and dataset
// files, the experiment driver, and the mean-deviation demo.
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robustreg/bounds.hpp"
#include "robustreg/cli.hpp"
#include "robustreg/kvconfig.hpp"
#include "robustreg/synthetic.hpp"

using namespace robustreg;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

/// Invokes the CLI in-process with stdout/stderr captured.
CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("robustreg");
  for (const std::string& a : args) argv.push_back(a.c_str());

  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliResult r;
  try {
    r.code = cli_run(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path fresh_dir(const std::string& leaf) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// The remainder of the line following "<key> = " (first occurrence).
std::string line_after(const std::string& text, const std::string& key) {
  const std::string tag = key + " = ";
  const std::size_t pos = text.find(tag);
  REQUIRE_MESSAGE(pos != std::string::npos, "missing `" << tag << "` in:\n" << text);
  const std::size_t start = pos + tag.size();
  const std::size_t end = text.find('\n', start);
  return text.substr(start, end == std::string::npos ? end : end - start);
}

double value_after(const std::string& text, const std::string& key) {
  return std::stod(line_after(text, key));
}

DistributionSpec small_partition() {
  Eigen::VectorXd p(2);
  p << 0.6, 0.4;
  const ParamBox box(Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(1.0, 1.0));
  return DistributionSpec::partition_design(p, 0.5, NoiseSpec::gaussian(0.3), box);
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("help requests succeed and parse failures exit with 2") {
  const CliResult help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("fit") != std::string::npos);
  CHECK(help.out.find("experiment") != std::string::npos);
  CHECK(help.out.find("verify") != std::string::npos);

  const CliResult fit_help = run_cli({"fit", "--help"});
  CHECK(fit_help.code == 0);
  CHECK(fit_help.out.find("--estimator") != std::string::npos);

  CHECK(run_cli({}).code == 2);                        // a subcommand is required
  CHECK(run_cli({"frobnicate"}).code == 2);            // unknown subcommand
  CHECK(run_cli({"constants", "--bogus"}).code == 2);  // unknown flag
}

TEST_CASE("constants prints the bounded-noise coefficient table") {
  const CliResult r = run_cli({"constants", "--sigma", "1", "--H", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("lambda rule: 0.32 (2 sigma + H)^-2") != std::string::npos);
  CHECK(r.out.find("V = 9") != std::string::npos);
  CHECK(r.out.find("C1 = 16.6  (") != std::string::npos);
  CHECK(r.out.find("C2 = 12.5  (") != std::string::npos);
  CHECK(r.out.find("C1/2 = 8.3  (") != std::string::npos);
  CHECK(r.out.find("rate: V (C1 D + C2 log(2 sqrt(G)/eps)) / n") != std::string::npos);

  const PacBayesConstants c = trunc_risk_constants(1.0, 1.0, 0.32 / 9.0, 0.18);
  CHECK(value_after(r.out, "eta") == doctest::Approx(c.eta).epsilon(1e-15));
  CHECK(value_after(r.out, "eta_prime") == doctest::Approx(c.eta_prime).epsilon(1e-15));
  // the exact value is echoed in parentheses after the three-figure one
  const std::size_t paren = r.out.find("C1 = 16.6  (");
  REQUIRE(paren != std::string::npos);
  const double exact = std::stod(r.out.substr(paren + std::string("C1 = 16.6  (").size()));
  CHECK(exact == doctest::Approx(c.C1).epsilon(1e-15));
}

TEST_CASE("constants computes a numeric bound when D, eps and n are supplied") {
  const CliResult r = run_cli({"constants", "--sigma", "1", "--H", "1", "--D", "2", "--eps",
                               "0.05", "--n", "400"});
  REQUIRE(r.code == 0);

  const PacBayesConstants c = trunc_risk_constants(1.0, 1.0, 0.32 / 9.0, 0.18);
  CHECK(value_after(r.out, "gamma(n)") == doctest::Approx(c.gamma(400)).epsilon(1e-14));
  CHECK(value_after(r.out, "gamma*(n)") == doctest::Approx(c.gamma_star(400)).epsilon(1e-14));

  const std::string tag = "bound(D=2, eps=0.05, n=400) = ";
  const std::size_t pos = r.out.find(tag);
  REQUIRE_MESSAGE(pos != std::string::npos, r.out);
  const double printed = std::stod(r.out.substr(pos + tag.size()));
  CHECK(printed == doctest::Approx(risk_bound(c, 2.0, 0.05, 400)).epsilon(1e-14));
}

TEST_CASE("constants accepts an explicit variance factor with a lambda") {
  const CliResult r =
      run_cli({"constants", "--V", "4", "--lambda", "0.05", "--eta-prime", "0.25"});
  REQUIRE(r.code == 0);
  // no default rule in play and no sigma/H echo on this route
  CHECK(r.out.find("lambda rule") == std::string::npos);
  CHECK(r.out.find("sigma = ") == std::string::npos);

  const PacBayesConstants c = variance_risk_constants(4.0, 1.0, 0.05, 0.25);
  // the leading figure is printed to three significant digits
  CHECK(value_after(r.out, "C1") == doctest::Approx(c.C1).epsilon(5e-3));
  CHECK(value_after(r.out, "eta") == doctest::Approx(c.eta).epsilon(1e-15));
}

TEST_CASE("constants refuses incomplete parameter sets") {
  const CliResult none = run_cli({"constants"});
  CHECK(none.code == 2);
  CHECK(none.err.find("--sigma and --H") != std::string::npos);

  CHECK(run_cli({"constants", "--sigma", "1"}).code == 2);

  const CliResult v_only = run_cli({"constants", "--V", "9"});
  CHECK(v_only.code == 2);
  CHECK(v_only.err.find("--lambda") != std::string::npos);
}

TEST_CASE("verify runs one suite and writes the margin table") {
  const std::filesystem::path dir = fresh_dir("robustreg-cli-verify");
  const std::filesystem::path csv = dir / "margins.csv";
  const CliResult r = run_cli({"verify", "--suite", "truncation", "--out", csv.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("pass  ") != std::string::npos);
  CHECK(r.out.find(" 0 failed") != std::string::npos);
  CHECK(r.out.find("wrote " + csv.string()) != std::string::npos);

  const std::string text = slurp(csv);
  std::istringstream lines(text);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "theorem,param_json,lhs,rhs,margin,pass");
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    const bool passed = line.size() >= 2 && line.substr(line.size() - 2) == ",1";
    CHECK_MESSAGE(passed, line);
  }
  CHECK(rows >= 2);
}

TEST_CASE("verify rejects an unknown suite") {
  const CliResult r = run_cli({"verify", "--suite", "nope"});
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown suite") != std::string::npos);
}

TEST_CASE("fit draws from a distribution file and reports exact risks") {
  const std::filesystem::path dir = fresh_dir("robustreg-cli-fit");
  const std::filesystem::path spec = dir / "law.spec";
  write_file(spec, small_partition().serialize());

  const std::vector<std::string> args = {"fit", "--estimator", "ols", "--spec", spec.string(),
                                         "--n", "40", "--seed", "7"};
  const CliResult r = run_cli(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("estimator = ols\n") != std::string::npos);
  CHECK(r.out.find("n = 40\n") != std::string::npos);
  CHECK(r.out.find("seed = 7\n") != std::string::npos);

  const Eigen::VectorXd theta = kv_to_vector(line_after(r.out, "theta"));
  REQUIRE(theta.size() == 2);
  CHECK(theta.allFinite());

  // true risk minus excess risk recovers the irreducible noise variance
  const double true_risk = value_after(r.out, "true_risk");
  const double excess = value_after(r.out, "excess_risk");
  CHECK(true_risk - excess == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(value_after(r.out, "empirical_risk") > 0.0);

  // deterministic, and the global --seed may precede the subcommand
  CHECK(run_cli(args).out == r.out);
  const CliResult moved =
      run_cli({"--seed", "7", "fit", "--estimator", "ols", "--spec", spec.string(), "--n", "40"});
  CHECK(moved.out == r.out);

  // --out mirrors the report into a file
  const std::filesystem::path report = dir / "fit.txt";
  std::vector<std::string> with_out = args;
  with_out.insert(with_out.end(), {"--out", report.string()});
  const CliResult saved = run_cli(with_out);
  REQUIRE(saved.code == 0);
  CHECK(slurp(report) == r.out);
}

TEST_CASE("fit validates its input-source arguments") {
  const CliResult neither = run_cli({"fit", "--estimator", "ols"});
  CHECK(neither.code == 2);
  CHECK(neither.err.find("exactly one") != std::string::npos);

  CHECK(run_cli({"fit", "--estimator", "ols", "--spec", "a", "--data", "b"}).code == 2);

  const CliResult small_n = run_cli({"fit", "--estimator", "ols", "--spec", "x", "--n", "1"});
  CHECK(small_n.code == 2);
  CHECK(small_n.err.find("--n >= 2") != std::string::npos);

  const CliResult gone = run_cli({"fit", "--estimator", "ols", "--spec",
                                  "/nonexistent/robustreg-law.spec", "--n", "8"});
  CHECK(gone.code == 1);
  CHECK(gone.err.find("error: ") != std::string::npos);
  CHECK(gone.err.find("cannot open") != std::string::npos);

  const std::filesystem::path dir = fresh_dir("robustreg-cli-fit-bad");
  const std::filesystem::path spec = dir / "law.spec";
  write_file(spec, small_partition().serialize());
  const CliResult unknown =
      run_cli({"fit", "--estimator", "wat", "--spec", spec.string(), "--n", "8"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("error: ") != std::string::npos);
}

TEST_CASE("fit consumes key-value dataset files") {
  const std::filesystem::path dir = fresh_dir("robustreg-cli-data");

  SUBCASE("cell indicators: least squares recovers per-cell means") {
    const std::filesystem::path file = dir / "cells.kv";
    write_file(file,
               "[data]\n"
               "features = cells\n"
               "dim = 2\n"
               "row = 0, 1.2\n"
               "row = 1, 0.4\n"
               "row = 0, 0.8\n");
    const CliResult r = run_cli({"fit", "--estimator", "ols", "--data", file.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const Eigen::VectorXd theta = kv_to_vector(line_after(r.out, "theta"));
    REQUIRE(theta.size() == 2);
    CHECK(theta[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(theta[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(r.out.find("n = 3\n") != std::string::npos);
    CHECK(r.out.find("empirical_risk = ") != std::string::npos);
    // no distribution available, so no population risks
    CHECK(r.out.find("true_risk") == std::string::npos);
    CHECK(r.out.find("excess_risk") == std::string::npos);
  }

  SUBCASE("raw coordinates with inferred dimension") {
    const std::filesystem::path file = dir / "raw.kv";
    write_file(file,
               "[data]\n"
               "row = 0.5, 1.0\n"
               "row = -0.5, -1.2\n"
               "row = 0.25, 0.6\n"
               "row = -0.25, -0.4\n");
    const CliResult r = run_cli({"fit", "--estimator", "ols", "--data", file.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const Eigen::VectorXd theta = kv_to_vector(line_after(r.out, "theta"));
    REQUIRE(theta.size() == 1);
    // one-dimensional least squares: sum(xy) / sum(x^2) = 1.35 / 0.625
    CHECK(theta[0] == doctest::Approx(2.16).epsilon(1e-12));
  }

  SUBCASE("a parameter box enables the constrained estimator") {
    const std::filesystem::path file = dir / "boxed.kv";
    write_file(file,
               "[data]\n"
               "features = cells\n"
               "dim = 2\n"
               "box_lo = -0.5, -0.5\n"
               "box_hi = 0.5, 0.5\n"
               "row = 0, 1.2\n"
               "row = 1, 0.4\n"
               "row = 0, 0.8\n");
    const CliResult r = run_cli({"fit", "--estimator", "erm-box", "--data", file.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const Eigen::VectorXd theta = kv_to_vector(line_after(r.out, "theta"));
    REQUIRE(theta.size() == 2);
    // indicator features separate, so the optimum clips the cell means
    CHECK(theta[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(theta[1] == doctest::Approx(0.4).epsilon(1e-6));
  }

  SUBCASE("malformed files surface as errors") {
    const std::filesystem::path empty = dir / "empty.kv";
    write_file(empty, "[data]\nfeatures = cells\ndim = 2\n");
    const CliResult no_rows = run_cli({"fit", "--estimator", "ols", "--data", empty.string()});
    CHECK(no_rows.code == 1);
    CHECK(no_rows.err.find("row") != std::string::npos);

    const std::filesystem::path frac = dir / "frac.kv";
    write_file(frac, "[data]\nfeatures = cells\ndim = 2\nrow = 0.5, 1.0\n");
    CHECK(run_cli({"fit", "--estimator", "ols", "--data", frac.string()}).code == 1);
  }
}

TEST_CASE("experiment runs a config file end to end") {
  const std::filesystem::path dir = fresh_dir("robustreg-cli-exp");
  const std::string spec_text =
      "[spec]\n"
      "variant = partition-design\n"
      "cell_probs = 0.6, 0.4\n"
      "location = 0.5\n"
      "features = plain\n"
      "noise_kind = gaussian\n"
      "noise_scale = 0.3\n"
      "box_lo = -1, -1\n"
      "box_hi = 1, 1\n"
      "\n"
      "[estimators]\n"
      "estimator = ols\n"
      "\n"
      "[grid]\n"
      "n = 12\n"
      "replications = 3\n";

  const std::filesystem::path cfg = dir / "exp.cfg";
  write_file(cfg, spec_text + "\n[output]\npath = " + (dir / "run").string() + "\nseed = 5\n");
  const CliResult r = run_cli({"experiment", "--config", cfg.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("(3 rows)") != std::string::npos);
  REQUIRE(std::filesystem::exists(dir / "run_reps.csv"));
  CHECK(std::filesystem::exists(dir / "run_summary.csv"));
  CHECK(std::filesystem::exists(dir / "run_bounds.csv"));

  std::istringstream reps(slurp(dir / "run_reps.csv"));
  std::string line;
  while (std::getline(reps, line) && (line.empty() || line[0] == '#')) {
  }  // skip the leading comment block
  CHECK(line == "estimator,n,rep,excess_risk,accept_rate,wall_ms");
  int rows = 0;
  while (std::getline(reps, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 3);

  // without an output path in the config, --out must supply one
  const std::filesystem::path bare = dir / "bare.cfg";
  write_file(bare, spec_text);
  const CliResult missing = run_cli({"experiment", "--config", bare.string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("no output path") != std::string::npos);

  const CliResult overridden =
      run_cli({"experiment", "--config", bare.string(), "--out", (dir / "alt").string()});
  REQUIRE_MESSAGE(overridden.code == 0, overridden.err);
  CHECK(std::filesystem::exists(dir / "alt_reps.csv"));
}

TEST_CASE("mean-demo reports deviation tables for student-t samples") {
  const std::filesystem::path dir = fresh_dir("robustreg-cli-demo");
  const std::filesystem::path csv = dir / "demo.csv";
  const CliResult r = run_cli({"mean-demo", "--nu", "3", "--n", "30", "--reps", "40", "--eps",
                               "0.1", "--out", csv.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("soft-truncated vs empirical mean") != std::string::npos);
  CHECK(r.out.find("robust_viol") != std::string::npos);

  const std::string text = slurp(csv);
  CHECK(text.rfind("metric,eps,value\n", 0) == 0);
  CHECK(text.find("robust_violation_freq,0.1,") != std::string::npos);
  CHECK(text.find("empirical_q0.9,,") != std::string::npos);

  const CliResult heavy = run_cli({"mean-demo", "--nu", "2"});
  CHECK(heavy.code == 2);
  CHECK(heavy.err.find("nu > 2") != std::string::npos);

  const CliResult bad_eps = run_cli({"mean-demo", "--nu", "3", "--eps", "1.5"});
  CHECK(bad_eps.code == 1);  // domain errors inside a subcommand map to 1
  CHECK(bad_eps.err.find("error: ") != std::string::npos);
}

TEST_SUITE_END();
