#pragma once

#include <cstdint>

#include "sem/errors.hpp"

namespace sem {

// Uniform time grid on [0, T] with n_steps steps of width dt = T / n_steps.
struct GridSpec {
  double horizon_T = 1.0;
  std::int64_t n_steps = 1;
  double dt = 1.0;
};

inline GridSpec make_grid(double horizon_T, std::int64_t n_steps) {
  if (!(horizon_T > 0.0))
    throw ConfigError("randomness::make_grid: horizon T must be > 0");
  if (n_steps < 1)
    throw ConfigError("randomness::make_grid: n_steps must be >= 1");
  return GridSpec{horizon_T, n_steps, horizon_T / static_cast<double>(n_steps)};
}

}  // namespace sem
