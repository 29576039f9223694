#include <stdexcept>

#include <Eigen/Core>
#include <doctest.h>

#include "robustreg/kvconfig.hpp"

using namespace robustreg;

TEST_SUITE_BEGIN("kvconfig");

TEST_CASE("parse sections, comments, duplicate keys; render round-trips") {
  const std::string text =
      "# whole-line comment\n"
      "[spec]\n"
      "variant = partition-design\n"
      "cell_probs = 0.5,0.5\n"
      "\n"
      "[estimators]\n"
      "estimator = ols\n"
      "estimator = ridge(lambda=0.1)\n";
  const KvFile file = KvFile::parse(text);
  REQUIRE(file.sections.size() == 2);
  CHECK(file.require("spec").require("variant") == "partition-design");
  CHECK(file.require("spec").get_or("missing", "fallback") == "fallback");
  CHECK(!file.require("spec").get("missing").has_value());
  CHECK(file.find("nope") == nullptr);
  CHECK_THROWS_AS(file.require("nope"), std::exception);
  CHECK_THROWS_AS(file.require("spec").require("nope"), std::exception);

  const auto estimators = file.require("estimators").get_all("estimator");
  REQUIRE(estimators.size() == 2);
  CHECK(estimators[0] == "ols");
  CHECK(estimators[1] == "ridge(lambda=0.1)");

  // render -> parse is the identity on content
  const KvFile again = KvFile::parse(file.render());
  REQUIRE(again.sections.size() == 2);
  CHECK(again.require("spec").entries == file.require("spec").entries);
  CHECK(again.require("estimators").entries == file.require("estimators").entries);
}

TEST_CASE("scalar codec is an exact double round-trip") {
  const double values[] = {0.0,       -0.0,    1.0 / 3.0,        -1e-308, 1e308,
                           0.1 + 0.2, 1e-17,   123456789.123456, -42.0,   3.141592653589793};
  for (double v : values) {
    CHECK(kv_to_double(kv_from_double(v)) == v);
  }
  CHECK(kv_to_int(kv_from_int(-123456789012345LL)) == -123456789012345LL);
  CHECK_THROWS_AS(kv_to_double("not a number"), std::exception);
  CHECK_THROWS_AS(kv_to_int("12.5x"), std::exception);
}

TEST_CASE("vector and matrix codecs round-trip exactly") {
  Eigen::VectorXd v(4);
  v << 1.0 / 3.0, -2.5e-7, 0.0, 9.99e99;
  const Eigen::VectorXd v2 = kv_to_vector(kv_from_vector(v));
  REQUIRE(v2.size() == 4);
  CHECK((v2.array() == v.array()).all());

  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5.5, -1.0 / 7.0;
  const Eigen::MatrixXd m2 = kv_to_matrix(kv_from_matrix(m));
  REQUIRE(m2.rows() == 2);
  REQUIRE(m2.cols() == 3);
  CHECK((m2.array() == m.array()).all());

  CHECK(kv_to_vector("42").size() == 1);
  CHECK_THROWS_AS(kv_to_matrix("1,2;3"), std::exception);  // ragged rows
}

TEST_CASE("kv_trim strips surrounding whitespace only") {
  CHECK(kv_trim("  a b \t") == "a b");
  CHECK(kv_trim("") == "");
  CHECK(kv_trim(" \t ") == "");
}

TEST_CASE("set appends (duplicate keys carry repeated entries); get returns the first") {
  KvFile file;
  KvSection& s = file.emplace("out");
  s.set("row", "a");
  s.set("row", "b");
  CHECK(s.get_all("row").size() == 2);
  CHECK(s.require("row") == "a");
  CHECK(file.find("out") != nullptr);
}

TEST_SUITE_END();
