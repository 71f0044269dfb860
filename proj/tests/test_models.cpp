#include <doctest.h>

#include <cmath>

#include "sem/models.hpp"

using namespace sem;

namespace {
double drift1(const SdeModel& m, double x) {
  double out;
  m.eval_drift({&x, 1}, {&out, 1});
  return out;
}
}  // namespace

TEST_CASE("indicator drift values and boundary behaviour") {
  const SdeModel m = indicator_drift(0.0, 1.0);
  CHECK(drift1(m, 0.5) == 1.0);
  CHECK(drift1(m, 2.0) == 0.0);
  CHECK(drift1(m, 1.0) == 1.0);  // closed interval
  CHECK(drift1(m, 0.0) == 1.0);
  CHECK(drift1(m, -1e-12) == 0.0);
  CHECK(m.assumptions.b_sup == 1.0);
  CHECK(m.assumptions.alpha == 1.0);
  CHECK_THROWS_AS(indicator_drift(1.0, 1.0), ConfigError);
}

TEST_CASE("smooth cutoff plateaus and support") {
  CHECK(smooth_cutoff(0.0) == 1.0);
  CHECK(smooth_cutoff(1.0) == 1.0);
  CHECK(smooth_cutoff(2.0) == 0.0);
  CHECK(smooth_cutoff(3.0) == 0.0);
  CHECK(smooth_cutoff(1.5) == doctest::Approx(0.5));
  for (double r = 1.0; r <= 2.0; r += 0.05) {
    CHECK(smooth_cutoff(r) >= 0.0);
    CHECK(smooth_cutoff(r) <= 1.0);
  }
}

TEST_CASE("drift truncation agrees inside the ball and vanishes outside 2k") {
  const SdeModel base = indicator_drift(0.0, 1.0);
  const double k = 0.4;
  const SdeModel trunc = truncate_drift(base, k);
  CHECK(drift1(trunc, 0.2) == drift1(base, 0.2));   // |x| = k/2
  CHECK(drift1(trunc, -0.2) == drift1(base, -0.2));
  CHECK(drift1(trunc, 1.2) == 0.0);                 // |x| = 3k
  for (double x = -3.0; x <= 3.0; x += 0.1)
    CHECK(std::fabs(drift1(trunc, x)) <= base.assumptions.b_sup);
  CHECK_THROWS_AS(truncate_drift(base, 0.0), ConfigError);

  SdeModel zero = builtin_model("zero");
  const SdeModel zero_trunc = truncate_drift(zero, 1.0);
  for (double x = -5.0; x <= 5.0; x += 0.5)
    CHECK(drift1(zero_trunc, x) == 0.0);
}

TEST_CASE("truncated Lp bound closed form and monotonicity") {
  // d=1, p=1: (2 sqrt(pi) / Gamma(3/2)) * k = 4 k with Gamma(3/2) = sqrt(pi)/2
  CHECK(truncated_lp_bound(1.0, 1.0, 1, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(truncated_lp_bound(2.0, 0.0, 1, 1.0) == 0.0);
  CHECK(truncated_lp_bound(3.0, 0.0, 2, 2.0) == 0.0);
  double prev = 0.0;
  for (double k = 0.5; k < 8.0; k *= 2.0) {
    const double v = truncated_lp_bound(k, 1.5, 2, 3.0);
    CHECK(v >= prev);
    prev = v;
  }
  // p -> infinity kills the volume factor and k^{d/p}
  CHECK(truncated_lp_bound(7.0, 2.0, 3, 1e9) ==
        doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("catalog lookups carry the right metadata") {
  const SdeModel zero = builtin_model("zero");
  CHECK(zero.assumptions.b_sup == 0.0);
  CHECK(drift1(zero, 3.0) == 0.0);
  double sig;
  const double x = 1.7;
  zero.eval_diffusion({&x, 1}, {&sig, 1});
  CHECK(sig == 1.0);

  const SdeModel ind = builtin_model("indicator-1d");
  CHECK(drift1(ind, 0.5) == 1.0);
  CHECK(ind.drift_jumps.size() == 2);

  const SdeModel gbm = builtin_model("gbm");
  CHECK(gbm.oracle_only);
  CHECK(!gbm.assumptions.a1_integrable);
  CHECK(std::isinf(gbm.assumptions.b_sup));

  const SdeModel box = builtin_model("indicator-box-2d");
  CHECK(box.dim_d == 2);
  CHECK(box.assumptions.in_k1(2));

  CHECK_THROWS_AS(builtin_model("nope"), ConfigError);
}

// Example drift: the unweighted squared shift modulus of the indicator is
// 2 min(|z|, width), in particular <= 2|z|.
TEST_CASE("indicator shift integral matches its closed form") {
  const SdeModel m = indicator_drift(0.0, 1.0);
  for (double z : {0.05, 0.2, 0.7, 1.5}) {
    // Riemann oracle on a grid wide enough to hold both shifted supports
    const double lo = -3.0, hi = 4.0;
    const int n = 400000;
    const double h = (hi - lo) / n;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lo + (i + 0.5) * h;
      const double diff = drift1(m, x + z) - drift1(m, x);
      integral += diff * diff * h;
    }
    const double closed = 2.0 * std::min(z, 1.0);
    CHECK(integral == doctest::Approx(closed).epsilon(1e-3));
    CHECK(integral <= 2.0 * z + 1e-3);
  }
}

TEST_CASE("indicator field norm closed form") {
  const ScalarField f = indicator_field(0.0, 1.0, 1.0, 2.0, 4.0);
  CHECK(f.lpq_norm == doctest::Approx(1.0));
  const double x_in = 0.4, x_out = 1.4;
  CHECK(f.f(0.0, {&x_in, 1}) == 1.0);
  CHECK(f.f(0.0, {&x_out, 1}) == 0.0);
  // T^{1/q} (b-a)^{1/p}
  const ScalarField g = indicator_field(0.0, 4.0, 16.0, 2.0, 4.0);
  CHECK(g.lpq_norm == doctest::Approx(4.0));
}

TEST_CASE("quadrature field norm agrees with smooth closed forms") {
  // f(t, x) = cos(x) on [-pi/2, pi/2], p = q = 2:
  // integral cos^2 = pi/2, norm = (T (pi/2))^{1/2}
  const ScalarField f = make_field(
      [](double, std::span<const double> x) { return std::cos(x[0]); }, 1,
      -M_PI / 2, M_PI / 2, 2.0, 2.0, 2.0);
  CHECK(f.lpq_norm == doctest::Approx(std::sqrt(2.0 * M_PI / 2.0)).epsilon(1e-12));

  // constant field over a 2-d box: norm = T^{1/q} vol^{1/p}
  const ScalarField g = make_field(
      [](double, std::span<const double>) { return 1.0; }, 2, 0.0, 2.0, 1.0,
      2.0, 4.0);
  CHECK(g.lpq_norm == doctest::Approx(2.0).epsilon(1e-12));
}
