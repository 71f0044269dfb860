#include <doctest.h>

#include <cmath>
#include <vector>

#include "sem/models.hpp"
#include "sem/regularity.hpp"

using namespace sem;

namespace {

// closed-form oracle for the indicator modulus: the integrand is 1 exactly
// on the symmetric difference of the shifted supports, so the weighted
// integral reduces to differences of the Gaussian error function.
double indicator_modulus_oracle(double a1, double a2, double s, double y,
                                double z) {
  auto gauss_mass = [&](double lo, double hi) {
    const double r = std::sqrt(s);
    return 0.5 * std::sqrt(M_PI * s) *
           (std::erf(hi / r) - std::erf(lo / r));
  };
  // intervals where the shifted indicators differ
  const double l1 = a1 - y, r1 = a2 - y;
  const double l2 = a1 - z, r2 = a2 - z;
  const double inter_lo = std::max(l1, l2);
  const double inter_hi = std::min(r1, r2);
  double mass = 0.0;
  if (inter_lo >= inter_hi) {  // disjoint: both intervals differ fully
    mass = gauss_mass(l1, r1) + gauss_mass(l2, r2);
  } else {
    mass = gauss_mass(std::min(l1, l2), inter_lo) +
           gauss_mass(inter_hi, std::max(r1, r2));
  }
  return mass / std::sqrt(s);
}

const std::vector<double> kSList = {0.25, 0.5, 1.0, 2.0};
const std::vector<double> kOffsets = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8,
                                      1.0 / 4};
const std::vector<double> kDir = {1.0};

}  // namespace

TEST_CASE("smoothed modulus of the indicator matches the closed form") {
  const SdeModel m = builtin_model("indicator-1d");
  for (double s : {0.3, 1.0, 2.7}) {
    for (double off : {0.05, 0.1, 0.6, 1.4}) {
      const double y = 0.0, z = off;
      const ModulusSample sample = a2_modulus(m, s, {&y, 1}, {&z, 1});
      const double oracle = indicator_modulus_oracle(0.0, 1.0, s, y, z);
      CHECK(sample.value == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
  // s=1, shift 0.1 stays under the 2|z| envelope
  const double y = 0.0, z = 0.1;
  const ModulusSample sample = a2_modulus(m, 1.0, {&y, 1}, {&z, 1});
  CHECK(sample.value <= 0.2);
  CHECK(sample.value > 0.0);
}

TEST_CASE("modulus is zero for equal shifts and constant drifts") {
  const SdeModel ind = builtin_model("indicator-1d");
  const double y = 0.3, z = 0.3;
  CHECK(a2_modulus(ind, 1.0, {&y, 1}, {&z, 1}).value == 0.0);

  const SdeModel zero = builtin_model("zero");
  const double a = 0.0, b = 0.7;
  CHECK(a2_modulus(zero, 1.0, {&a, 1}, {&b, 1}).value == 0.0);

  const SdeModel constant = builtin_model("constant");
  CHECK(a2_modulus(constant, 1.0, {&a, 1}, {&b, 1}).value == 0.0);
}

TEST_CASE("modulus is symmetric in the two shifts") {
  const SdeModel m = builtin_model("indicator-1d");
  for (double s : {0.5, 1.0}) {
    for (double off : {0.07, 0.4}) {
      const double y = 0.1, z = 0.1 + off;
      const double a = a2_modulus(m, s, {&y, 1}, {&z, 1}).value;
      const double b = a2_modulus(m, s, {&z, 1}, {&y, 1}).value;
      CHECK(a == b);
    }
  }
}

TEST_CASE("shifted pairs stay under the translation-invariant envelope") {
  // unweighted modulus of the indicator is <= 2|y-z|, and the Gaussian
  // weight is at most 1, so s^{-1/2} * 2|y-z| dominates every recentering
  const SdeModel m = builtin_model("indicator-1d");
  const double s = 1.0, off = 0.125;
  for (double c : {-2.0, -0.5, 0.0, 0.5, 2.0}) {
    const double y = c, z = c + off;
    const double v = a2_modulus(m, s, {&y, 1}, {&z, 1}).value;
    CHECK(v <= 2.0 * off / std::sqrt(s) + 1e-12);
  }
}

TEST_CASE("quadrature error estimates are tight") {
  const SdeModel ind = builtin_model("indicator-1d");
  const double y = 0.0, z = 0.1;
  const ModulusSample jumpy = a2_modulus(ind, 1.0, {&y, 1}, {&z, 1});
  CHECK(jumpy.quadrature_error_estimate <= 1e-3 * jumpy.value);

  const SdeModel smooth = builtin_model("sin");
  const ModulusSample soft = a2_modulus(smooth, 1.0, {&y, 1}, {&z, 1});
  CHECK(soft.quadrature_error_estimate <= 1e-6 * soft.value);
}

TEST_CASE("fitted exponent classifies indicator vs Lipschitz drifts") {
  const AlphaFit ind = fit_alpha(builtin_model("indicator-1d"), kSList,
                                 kOffsets, kDir);
  CHECK(!ind.degenerate);
  CHECK(ind.alpha_hat > 0.9);
  CHECK(ind.alpha_hat < 1.1);
  CHECK(ind.r_squared > 0.99);

  const AlphaFit lip = fit_alpha(builtin_model("sin"), kSList, kOffsets, kDir);
  CHECK(lip.alpha_hat > 1.8);
  CHECK(lip.alpha_hat < 2.1);

  const AlphaFit flat = fit_alpha(builtin_model("zero"), kSList, kOffsets, kDir);
  CHECK(flat.degenerate);
  CHECK(std::isnan(flat.alpha_hat));
}

TEST_CASE("fit preconditions") {
  const SdeModel m = builtin_model("indicator-1d");
  const std::vector<double> two = {0.1, 0.2};
  CHECK_THROWS_AS(fit_alpha(m, kSList, two, kDir), ConfigError);
  const std::vector<double> narrow = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(fit_alpha(m, kSList, narrow, kDir), ConfigError);
}

TEST_CASE("double-smoothed modulus scales like sqrt(r/s) for the indicator") {
  const SdeModel m = builtin_model("indicator-1d");
  const SdeModel zero = builtin_model("zero");
  const double mid = 0.5;
  CHECK(gb_modulus(zero, 1.0, 1.0, {&mid, 1}) == 0.0);

  // frozen envelope constant over the probe grid (class membership check)
  const double frozen_c = 4.0;
  for (double r : {0.25, 1.0, 4.0}) {
    for (double s : {0.25, 1.0, 4.0}) {
      for (double z = -0.5; z <= 1.5; z += 0.2) {
        const double v = gb_modulus(m, r, s, {&z, 1});
        CHECK(v >= 0.0);
        CHECK(v <= frozen_c * std::sqrt(r) / std::sqrt(s));
      }
    }
  }
  // the inner Gaussian concentrates as r -> 0
  const double coarse = gb_modulus(m, 1.0, 1.0, {&mid, 1});
  const double fine = gb_modulus(m, 1e-4, 1.0, {&mid, 1});
  CHECK(fine < 0.05 * coarse);
  CHECK(coarse > 0.0);
}

TEST_CASE("Gagliardo seminorm: basics and stability") {
  const SdeModel zero = builtin_model("zero");
  CHECK(gagliardo_seminorm(zero, 2.0, 0.3, -1.0, 2.0, 500) == 0.0);

  const SdeModel smooth = builtin_model("sin");
  const double a = gagliardo_seminorm(smooth, 2.0, 0.3, -M_PI, M_PI, 1500);
  const double b = gagliardo_seminorm(smooth, 2.0, 0.3, -M_PI, M_PI, 3000);
  CHECK(a == doctest::Approx(b).epsilon(0.02));
  CHECK(a > 0.0);

  const SdeModel ind = builtin_model("indicator-1d");
  CHECK_THROWS_AS(gagliardo_seminorm(ind, 2.0, 0.3, 2.0, -1.0, 500),
                  ConfigError);
  CHECK_THROWS_AS(gagliardo_seminorm(ind, 1.0, 0.3, -1.0, 2.0, 500),
                  ConfigError);
  CHECK_THROWS_AS(gagliardo_seminorm(ind, 2.0, 1.2, -1.0, 2.0, 500),
                  ConfigError);

  // divergence pattern: strictly increasing along the theta ladder
  double prev = 0.0;
  for (double theta : {0.3, 0.4, 0.45, 0.49}) {
    const double v = gagliardo_seminorm(ind, 2.0, theta, -0.02, 1.02, 2080);
    CHECK(v > prev);
    prev = v;
  }
}
