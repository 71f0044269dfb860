#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sem/engine.hpp"
#include "sem/grid.hpp"
#include "sem/models.hpp"

namespace sem {

struct KrylovReport {
  double lam = 0.0;
  double functional_mean = 0.0;
  double functional_ci95 = 0.0;
  double exp_mean = 1.0;
  double exp_ci95 = 0.0;
  double theoretical_exp_bound = 2.0;  // may be +inf past double range
  double onestep_bound = 0.0;
  bool passed = true;  // exp_mean + exp_ci95 <= theoretical_exp_bound
};

struct DensityBin {
  std::vector<double> center;
  double width = 0.0;
  std::int64_t count = 0;
  double empirical_density = 0.0;
  double bound_value = 0.0;
  double slack_3sigma = 0.0;
};

struct DensityCheck {
  double time_t = 0.0;
  std::int64_t anchor_j = 0;
  std::vector<DensityBin> bins;
  std::int64_t violations = 0;
  bool degenerate = false;
};

// Number of evaluation points per chain step for the time integrals.  The
// chain is evaluated between grid nodes through its defining continuous
// form (anchor drift/diffusion applied to the shared fine increments), not
// by interpolating node values.
inline constexpr int kSubSteps = 8;

// Monte Carlo estimate of E integral_0^T |f(t, X_t)| dt for the EM chain on
// `grid`, with the one-step conditional bound alpha0 ||f|| T^{1/gamma0}.
// sub_steps widens the evaluation grid (diagnostics only).
KrylovReport krylov_functional_mc(const SdeModel& model, const ScalarField& f,
                                  std::span<const double> x0,
                                  const GridSpec& grid, std::int64_t n_paths,
                                  std::uint64_t seed,
                                  int sub_steps = kSubSteps);

// Exponential-moment estimate E exp(lam integral |f|) against the bound
// 2^{1 + T (2 lam alpha0 ||f||)^{gamma0}}.  With use_exact_proxy the chain
// runs on a 16x finer grid as a stand-in for the exact solution and the
// bound uses hat_alpha0 instead of alpha0.
KrylovReport khasminskii_mc(const SdeModel& model, const ScalarField& f,
                            double lam, std::span<const double> x0,
                            const GridSpec& grid, std::int64_t n_paths,
                            std::uint64_t seed, bool use_exact_proxy = false);

// Monte Carlo estimate of integral_0^T E |b(X_t) - b(X_{t_delta})|^2 dt.
std::pair<double, double> drift_increment_mc(const SdeModel& model,
                                             std::span<const double> x0,
                                             const GridSpec& grid,
                                             std::int64_t n_paths,
                                             std::uint64_t seed);

// Histogram of X_t over paths started at x0 at node time anchor_j * delta,
// against the Gaussian envelope
//   Lambda3 e^{-|y-x|^2 / (kappa0 (t - j delta))} / (2 pi lambda_lower (t - j delta))^{d/2}.
// Bins violating the envelope beyond the 3-sigma multinomial slack count as
// violations.
DensityCheck density_check(const SdeModel& model, std::span<const double> x0,
                           const GridSpec& grid, std::int64_t anchor_j,
                           double t, std::int64_t n_paths, int n_bins,
                           std::uint64_t seed);

std::string density_csv(const DensityCheck& check);
std::string krylov_csv(std::span<const KrylovReport> reports);

}  // namespace sem
