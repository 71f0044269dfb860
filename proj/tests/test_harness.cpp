#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sem/errors.hpp"
#include "sem/harness.hpp"
#include "sem/parallel.hpp"

using namespace sem;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

StudyConfig small_zero_config() {
  StudyConfig c;
  c.model_label = "zero";
  c.x0 = {0.0};
  c.horizon_T = 1.0;
  c.delta_ladder = {1.0 / 4, 1.0 / 8};
  c.ref_refinement = 4;
  c.beta = 1.0;
  c.n_paths = 50;
  c.seed = 1;
  return c;
}

}  // namespace

TEST_CASE("minimal config text picks the documented defaults") {
  const StudyConfig c = parse_config_text("model = zero\n");
  CHECK(c.model_label == "zero");
  CHECK(c.horizon_T == 1.0);
  CHECK(c.beta == 1.0);
  CHECK(c.n_paths == 10000);
  CHECK(c.ref_refinement == 16);
  REQUIRE(c.delta_ladder.size() == 5);  // T/2^4 .. T/2^8
  CHECK(c.delta_ladder.front() == 1.0 / 16);
  CHECK(c.delta_ladder.back() == 1.0 / 256);
}

TEST_CASE("config rejection paths name the problem") {
  CHECK_THROWS_WITH_AS(parse_config_text("model=zero\ndeltas=0.3,0.1\n"),
                       doctest::Contains("T / 2^j"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("model=zero\nmodel=sin\n"),
                       doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("model=zero\nbogus=1\n"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("model=zero\nbeta=abc\n"),
                       doctest::Contains("bad value"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("model=zero\nbeta\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=zero\nbeta=2.5\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("model=zero\ndeltas=0.25,0.25\n"),  // not decreasing
      ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("model=zero\ntruncation_mode=fixed\n"),  // k missing
      ConfigError);
}

TEST_CASE("rate CSV round-trips to full double precision") {
  RateFit fit;
  fit.points = {{0.0625, 0.12345678901234567, 0.001234567890123456},
                {0.03125, 0.07654321098765432, 0.000987654321098765}};
  fit.beta = 1.0;
  fit.theoretical_rate = 0.25;
  fit.n_paths = 1234;
  fit.slope = 0.4999999999999999;
  fit.r_squared = 0.987654321;

  const std::string path = temp_path("sem_rate_roundtrip.csv");
  write_csv(fit, path);
  const RateFit back = read_rate_csv(path);
  REQUIRE(back.points.size() == fit.points.size());
  for (std::size_t i = 0; i < fit.points.size(); ++i) {
    CHECK(back.points[i].delta == fit.points[i].delta);
    CHECK(back.points[i].error_mean == fit.points[i].error_mean);
    CHECK(back.points[i].error_stderr == fit.points[i].error_stderr);
  }
  CHECK(back.n_paths == fit.n_paths);
  CHECK(back.beta == fit.beta);
  CHECK(back.theoretical_rate == fit.theoretical_rate);
  CHECK(back.slope == fit.slope);
  CHECK(back.r_squared == fit.r_squared);
  std::remove(path.c_str());
}

TEST_CASE("report pass/fail arithmetic at the configured margin") {
  RateFit fit;
  fit.points = {{0.25, 0.2, 1e-3}, {0.125, 0.1, 1e-3}};
  fit.theoretical_rate = 0.25;
  fit.beta = 1.0;
  fit.n_paths = 100;
  const ConstantsReport constants =
      constants_report(builtin_model("indicator-1d").assumptions, 1, 1);

  fit.slope = 0.27;
  RateReport pass_report = rate_report(fit, constants, 0.05);
  CHECK(pass_report.pass);

  fit.slope = 0.10;
  RateReport fail_report = rate_report(fit, constants, 0.05);
  CHECK(!fail_report.pass);
  CHECK(fail_report.summary.find("FAIL") != std::string::npos);
}

TEST_CASE("weighted fit recovers an exact power law") {
  std::vector<RatePoint> points;
  for (int j = 2; j <= 6; ++j) {
    const double delta = std::pow(2.0, -j);
    points.push_back({delta, 3.0 * std::pow(delta, 0.5), 1e-4});
  }
  const RateFit fit = fit_rate(points, 1.0, 0.25, 100);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!fit.degenerate_exact);
}

TEST_CASE("zero-drift study is flagged degenerate-exact") {
  const RateFit fit = run_convergence(small_zero_config());
  CHECK(fit.degenerate_exact);
  ConstantsReport rep = constants_report(
      builtin_model("zero").assumptions, 1, 1);
  const RateReport report = rate_report(fit, rep);
  CHECK(!report.applicable);
  CHECK(report.pass);
}

TEST_CASE("closed-form oracle study lands near strong order one half") {
  StudyConfig c;
  c.model_label = "gbm";
  c.x0 = {1.0};
  c.delta_ladder = {1.0 / 16, 1.0 / 64};
  c.ref_refinement = 4;
  c.n_paths = 500;
  c.seed = 3;
  const RateFit fit = run_convergence(c);
  CHECK(fit.slope > 0.3);
  CHECK(fit.slope < 0.7);
}

TEST_CASE("integrability gate names the violated assumption") {
  StudyConfig c = small_zero_config();
  c.model_label = "sin";
  CHECK_THROWS_WITH_AS(run_convergence(c), doctest::Contains("(A1)"),
                       ConfigError);
  // the truncation path lifts the restriction
  c.truncation = TruncationMode::kOptimal;
  const RateFit fit = run_convergence(c);
  CHECK(!fit.points.empty());
}

TEST_CASE("large fixed truncation radius reproduces the plain study bit for bit") {
  StudyConfig plain;
  plain.model_label = "indicator-1d";
  plain.x0 = {0.5};
  plain.delta_ladder = {1.0 / 8, 1.0 / 16};
  plain.ref_refinement = 4;
  plain.n_paths = 200;
  plain.seed = 17;
  StudyConfig trunc = plain;
  trunc.truncation = TruncationMode::kFixed;
  trunc.fixed_k = 50.0;  // no path leaves this ball at these parameters

  const RateFit a = run_convergence(plain);
  const RateFit b = run_convergence(trunc);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].error_mean == b.points[i].error_mean);
    CHECK(a.points[i].error_stderr == b.points[i].error_stderr);
  }
}

TEST_CASE("two-dimensional box drift beats its theoretical rate") {
  StudyConfig c;
  c.model_label = "indicator-box-2d";
  c.x0 = {0.5, 0.5};
  c.delta_ladder = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  c.ref_refinement = 8;
  c.beta = 1.0;
  c.n_paths = 1500;
  c.seed = 61;
  const RateFit fit = run_convergence(c);
  // alpha = 1, beta = 1: guaranteed rate 1/4; the margin matches the report
  CHECK(fit.theoretical_rate == 0.25);
  CHECK(fit.slope >= fit.theoretical_rate - 0.05);
  for (std::size_t i = 1; i < fit.points.size(); ++i)
    CHECK(fit.points[i].error_mean < fit.points[i - 1].error_mean);
}

TEST_CASE("prefactor-shape column decays along the ladder tail") {
  StudyConfig c;
  c.model_label = "indicator-1d";
  c.x0 = {0.5};
  c.delta_ladder = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  c.ref_refinement = 4;
  c.n_paths = 300;
  c.seed = 23;
  const RateFit fit = run_convergence(c);
  const ConstantsReport constants = constants_report(
      builtin_model("indicator-1d").assumptions, 1, 1);
  const RateReport report = rate_report(fit, constants);
  REQUIRE(report.s4_product.size() == c.delta_ladder.size());
  for (std::size_t i = 1; i < report.s4_product.size(); ++i) {
    CHECK(std::isfinite(report.s4_prefactor[i]));
    CHECK(report.s4_product[i] < report.s4_product[i - 1]);
  }
}

TEST_CASE("identical configs give identical CSV bytes across thread counts") {
  StudyConfig c;
  c.model_label = "indicator-1d";
  c.x0 = {0.5};
  c.delta_ladder = {1.0 / 8, 1.0 / 16};
  c.ref_refinement = 4;
  c.n_paths = 300;
  c.seed = 99;

  set_max_threads(1);
  const std::string csv_serial = rate_csv(run_convergence(c));
  set_max_threads(4);
  const std::string csv_parallel = rate_csv(run_convergence(c));
  set_max_threads(0);
  const std::string csv_again = rate_csv(run_convergence(c));
  CHECK(csv_serial == csv_parallel);
  CHECK(csv_serial == csv_again);
}

TEST_CASE("atomic writes leave no temp file behind") {
  const std::string path = temp_path("sem_atomic.csv");
  write_text_atomic(path, "hello\n");
  CHECK(std::filesystem::exists(path));
  CHECK(!std::filesystem::exists(path + ".tmp"));
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "hello");
  std::remove(path.c_str());
}
