#pragma once

#include <span>
#include <vector>

#include "sem/models.hpp"

namespace sem {

struct ModulusSample {
  double s = 1.0;
  std::vector<double> y;
  std::vector<double> z;
  double value = 0.0;
  double quadrature_error_estimate = 0.0;
};

struct AlphaFit {
  double alpha_hat = 0.0;
  std::vector<double> log_intercepts_by_s;
  double r_squared = 0.0;
  std::vector<double> offsets_used;
  bool degenerate = false;  // all moduli vanish (constant drift)
};

// Gaussian-smoothed squared modulus of the drift:
//   s^{-d/2} * integral |b(x+y) - b(x+z)|^2 e^{-|x|^2/s} dx.
// After the substitution x = sqrt(s) u the prefactor cancels exactly and the
// weight becomes e^{-|u|^2}.  Drifts that expose 1-d jump locations are
// integrated with Gauss-Legendre panels split at the jumps; smooth drifts go
// through tensor Gauss-Hermite.  The error estimate comes from node-count
// doubling (the returned value is the finer pass).
ModulusSample a2_modulus(const SdeModel& model, double s,
                         std::span<const double> y, std::span<const double> z);

// Per-s regression of log(modulus) against log|y - z| along `direction`;
// alpha_hat is the s-averaged slope, r_squared comes from the pooled
// regression with per-s intercepts.
AlphaFit fit_alpha(const SdeModel& model, std::span<const double> s_list,
                   std::span<const double> offset_list,
                   std::span<const double> direction);

// Double-Gaussian-smoothed modulus at a fixed translate z:
//   (rs)^{-d/2} * integral |b(x) - b(y)|^2 e^{-|x-z|^2/s} e^{-|y-x|^2/r} dy dx.
// The sup over z is probed by the caller on a finite grid.
double gb_modulus(const SdeModel& model, double r, double s,
                  std::span<const double> z);

// Midpoint-rule Gagliardo seminorm over box^2 excluding the diagonal band
// |x - y| < box_width/grid (1-d drifts).
double gagliardo_seminorm(const SdeModel& model, double p_exp, double theta,
                          double box_lo, double box_hi, std::int64_t grid);

}  // namespace sem
