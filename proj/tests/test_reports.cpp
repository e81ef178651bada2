#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fiberlab/reports.hpp"

using namespace fiberlab;

TEST_CASE("format_double prints the shortest round-tripping decimal") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.25) == "-2.25");
  CHECK(format_double(0.0) == "0");

  // values with no short decimal representation still round-trip exactly
  for (double v : {1.0 / 3.0, 0.1, std::sqrt(2.0), 6.02e23, -7.3e-12}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(s.size() <= 24);
  }
}

TEST_CASE("epsilon values parse as exact rationals or decimals") {
  CHECK(parse_epsilon("1/16") == 0.0625);
  CHECK(parse_epsilon("3/4") == 0.75);
  CHECK(parse_epsilon("0.0625") == 0.0625);
  CHECK(parse_epsilon("1e-2") == 0.01);

  CHECK_THROWS_AS(parse_epsilon("banana"), std::invalid_argument);
  CHECK_THROWS_AS(parse_epsilon("0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_epsilon("-1/4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_epsilon("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_epsilon(""), std::invalid_argument);

  // the error message names the offending text
  try {
    parse_epsilon("2x");
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("2x") != std::string::npos);
  }

  const std::vector<double> list = parse_epsilon_list("1/4,1/8,0.0625");
  REQUIRE(list.size() == 3);
  CHECK(list[0] == 0.25);
  CHECK(list[1] == 0.125);
  CHECK(list[2] == 0.0625);
  CHECK_THROWS_AS(parse_epsilon_list("1/4,,1/8"), std::invalid_argument);
}

TEST_CASE("rate fits recover exact power laws") {
  // value = 3 * eps^2: slope exactly 2 on log-log data
  std::vector<std::pair<double, double>> pairs;
  for (double eps : {0.25, 0.125, 0.0625, 0.03125}) {
    pairs.emplace_back(eps, 3.0 * eps * eps);
  }
  const RateFit fit = fit_rate("quad", pairs);
  CHECK(fit.metric == "quad");
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(fit_rate("m", {{0.5, 1.0}, {0.25, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate("m", {{0.5, 1.0}, {0.25, 0.5}, {0.125, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate("m", {{0.5, 1.0}, {-0.25, 0.5}, {0.125, 0.25}}), std::invalid_argument);
}

TEST_CASE("convergence reports render stable CSV") {
  ConvergenceReport rep;
  rep.add(0.0625, "err", 0.0625 * 0.0625);
  rep.add(0.25, "err", 0.25 * 0.25);
  rep.add(0.125, "err", 0.125 * 0.125);
  const RateFit& fit = rep.fit("err");
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  rep.verdicts.push_back({"err_rate", true, "slope 2"});
  CHECK(rep.all_pass());

  const std::string csv = rep.to_csv();
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "eps,metric,value");
  // data rows: descending eps after fit() sorted them
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.25,err,0.0625");
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.125,err,0.015625");
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.0625,err,0.00390625");
  // fit rows: eps column "fit", metric suffixed
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("fit,err:slope,", 0) == 0);
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("fit,err:r2,", 0) == 0);

  const nlohmann::json j = nlohmann::json::parse(rep.to_json());
  CHECK(j.at("schema_version").get<int>() == 1);
  CHECK(j.at("rows").size() == 3);
  CHECK(j.at("fits").size() == 1);
  CHECK(j.at("fits")[0].at("metric").get<std::string>() == "err");
  CHECK(j.at("verdicts")[0].at("pass").get<bool>());

  ConvergenceReport failing;
  failing.verdicts.push_back({"x", false, "no"});
  CHECK(!failing.all_pass());

  ConvergenceReport sparse;
  sparse.add(0.25, "m", 1.0);
  sparse.add(0.125, "m", 0.5);
  CHECK_THROWS_AS(sparse.fit("m"), std::invalid_argument);
}

TEST_CASE("translation-modulus tables render one row per offset") {
  FkReport rep;
  rep.eps = 0.125;
  rep.p = 2.0;
  rep.fitted_C = 2.5;
  rep.rows.push_back({Vector2d(0.0, 0.0), 0.0, 0.5});
  rep.rows.push_back({Vector2d(0.125, 0.25), 0.75, 0.0});
  const std::string csv = fk_to_csv({rep});

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "eps,xi,value,fitted_C,slack");
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.125,0;0,0,2.5,0.5");
  REQUIRE(std::getline(in, line));
  CHECK(line == "0.125,0.125;0.25,0.75,2.5,0");
  CHECK(!std::getline(in, line));
}

TEST_CASE("connector-bound tables render case rows") {
  Lemma31Case a;
  a.id = "interpolant";
  a.report.lhs = 0.25;
  a.report.rhs = 0.125;
  a.report.ratio = 2.0;
  const std::string csv = lemma31_to_csv({a});
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "case,lhs,rhs,ratio");
  REQUIRE(std::getline(in, line));
  CHECK(line == "interpolant,0.25,0.125,2");
  CHECK(!std::getline(in, line));
}
