#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nodalab/checks.hpp"
#include "nodalab/config.hpp"
#include "nodalab/errors.hpp"
#include "nodalab/experiments.hpp"
#include "support.hpp"

using namespace nodalab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("config round trip") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::CubeCount;
  cfg.nr = 48;
  cfg.k_values = {3, 5};
  cfg.lambda_values = {4.5, 1.0 / 3.0};
  cfg.collar = 0.1 + 0.2;
  cfg.tolerances.beta_rel = 0.017;
  cfg.lattice.refine = false;
  cfg.criteria = {2, 9};
  cfg.seed = std::numeric_limits<std::uint64_t>::max();
  cfg.record_runtime = true;
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(back == cfg);
  CHECK(back.lambda_values[1] == 1.0 / 3.0);
  CHECK(config_to_json(back) == config_to_json(cfg));

  const auto dir = test::scratch("config");
  save_config(dir / "c.json", cfg);
  CHECK(load_config(dir / "c.json") == cfg);
  CHECK(config_from_json("{}") == ExperimentConfig{});
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config_from_json(R"({"colour": 1})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"tolerances": {"beta_rell": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"k_values": []})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"tolerances": {"beta_rel": 0}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"experiment": "nope"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json(R"({"nr": "many"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
  CHECK(parse_kind("frequency_suite") == ExperimentKind::FrequencySuite);
  CHECK(std::string(kind_name(ExperimentKind::TransformCheck)) == "transform_check");

  ExperimentConfig bad;
  bad.criteria = {12};
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("exponent fit") {
  std::vector<std::pair<double, double>> exact;
  for (double l : {2.0, 3.5, 8.0, 13.0}) exact.emplace_back(l, 3 * l * l);
  const auto fit = fit_exponent(exact);
  CHECK(std::abs(fit.slope - 2.0) <= 1e-9);
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  CHECK(fit.residual <= 1e-12);

  CHECK_THROWS_AS(fit_exponent({{2.0, 4.0}}), InvalidArgument);
  CHECK_THROWS_AS(fit_exponent({{1.0, 1.0}, {2.0, -1.0}, {3.0, 2.0}}), InvalidArgument);
  CHECK_THROWS_AS(fit_exponent({{2.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}}), InvalidArgument);
}

TEST_CASE("ball cover") {
  CHECK(ball_cover(1.0, 1.0).size() == 1);
  CHECK(ball_cover(1.0, 3.0).size() == 1);
  CHECK_THROWS_AS(ball_cover(1.0, 0.0), InvalidArgument);

  std::vector<double> density;
  for (double lambda : {4.0, 8.0, 16.0}) {
    const double r = 1.0 / (4 * lambda);
    const auto centers = ball_cover(1.0, r);
    const double estimate = std::pow(4 * lambda, 2) * std::numbers::pi / (2 * std::sqrt(3.0));
    const double n = static_cast<double>(centers.size());
    CHECK(n >= 0.5 * estimate);
    CHECK(n <= 2.0 * estimate);
    CHECK(cover_gap(centers, 1.0, 10000, 42) <= r);
    density.push_back(n / (lambda * lambda));
  }
  CHECK(density[2] / density[0] == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("emit outputs") {
  const auto dir = test::scratch("emit");
  emit_outputs(dir / "empty", SweepResult{});
  CHECK(slurp(dir / "empty" / "sweep.csv") == "k,lambda,nodal_length,N_max,b_ratio,q_ratio,runtime_s\n");
  CHECK(std::filesystem::exists(dir / "empty" / "fit.json"));

  ExperimentConfig cfg;
  cfg.nr = 32;
  cfg.ntheta = 64;
  cfg.k_values = {4, 2, 3, 2};
  const auto result = run_steklov_sweep(cfg);
  REQUIRE(result.records.size() == 3);
  CHECK(result.records[0].k == 2);
  CHECK(result.records[2].k == 4);
  CHECK(result.failures == 0);
  CHECK_FALSE(sweep_failed(result, cfg));
  REQUIRE(result.nodal_fit.has_value());
  for (const auto& r : result.records) {
    CHECK(r.lambda == doctest::Approx(r.k).epsilon(0.05));
    CHECK(r.nodal_length == doctest::Approx(2 * r.k).epsilon(0.05));
    CHECK(r.runtime_s == 0.0);
  }
  emit_outputs(dir / "a", result);
  emit_outputs(dir / "b", run_steklov_sweep(cfg));
  const auto csv = slurp(dir / "a" / "sweep.csv");
  CHECK(count_lines(csv) == 4);
  CHECK(csv == slurp(dir / "b" / "sweep.csv"));
  CHECK(slurp(dir / "a" / "fit.json") == slurp(dir / "b" / "fit.json"));
  int svgs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "a")) svgs += e.path().extension() == ".svg";
  CHECK(svgs == 3);
  CHECK(std::filesystem::exists(dir / "a" / "profile_k2.csv"));
}

TEST_CASE("failed rows are listed, not written") {
  SweepResult result;
  SweepRecord good;
  good.k = 2;
  good.lambda = 2.0;
  SweepRecord bad;
  bad.k = 3;
  bad.ok = false;
  bad.error = "stage failed";
  result.records = {good, bad};
  result.curves.resize(2);
  result.failures = 1;
  const auto dir = test::scratch("failures");
  emit_outputs(dir, result);
  CHECK(count_lines(slurp(dir / "sweep.csv")) == 2);
  CHECK(slurp(dir / "failures.txt") == "k=3: stage failed\n");
  ExperimentConfig cfg;
  CHECK(sweep_failed(result, cfg));
}

TEST_CASE("check formatting") {
  CHECK(std::string(check_name(9)) == "cube-counting");
  ExperimentConfig cfg;
  CHECK_THROWS_AS(run_check(99, cfg), InvalidArgument);
  CHECK(format_check(CheckResult{3, "growth-identity", true, "x"}).rfind("PASS", 0) == 0);
}
