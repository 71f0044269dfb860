#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sem/brownian.hpp"
#include "sem/grid.hpp"
#include "sem/models.hpp"

namespace sem {

struct Trajectory {
  GridSpec grid;
  int dim = 1;
  std::vector<double> states;  // (n_steps + 1) x dim, row-major
  std::string model_label;

  std::span<const double> state(std::int64_t k) const {
    return {states.data() + static_cast<std::size_t>(k) * dim,
            static_cast<std::size_t>(dim)};
  }
};

struct ErrorEstimate {
  double beta = 1.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_paths = 0;
  double delta = 0.0;      // coarse step size
  double delta_ref = 0.0;  // reference (fine) step size
};

// One explicit step: x + b(x) dt + sigma(x) dw, coefficients frozen at the
// left endpoint.  Throws NumericalError if the result is non-finite.
void em_step(const SdeModel& model, std::span<const double> x, double dt,
             std::span<const double> dw, std::span<double> out,
             std::int64_t step_index = -1);

Trajectory simulate(const SdeModel& model, std::span<const double> x0,
                    const BrownianTable& table);

// Reference chain on the fine grid versus the chain on the factor-coarsened
// grid, both driven by the same Brownian increments; returns the max
// distance over the coarse grid nodes raised to beta.  The fine chain stands
// in for the unavailable exact solution.
double coupled_sup_error(const SdeModel& model, std::span<const double> x0,
                         const BrownianTable& fine_table, std::int64_t factor,
                         double beta);

// Per-path coupled errors for paths 0..n_paths-1 (keyed streams; slot i is
// path i regardless of scheduling).
std::vector<double> coupled_sup_error_paths(const SdeModel& model,
                                            std::span<const double> x0,
                                            const GridSpec& grid_fine,
                                            std::int64_t factor, double beta,
                                            std::int64_t n_paths,
                                            std::uint64_t seed);

ErrorEstimate strong_error_mc(const SdeModel& model, std::span<const double> x0,
                              const GridSpec& grid_fine, std::int64_t factor,
                              double beta, std::int64_t n_paths,
                              std::uint64_t seed);

// |EM terminal value - x0 exp((mu - sigma^2/2) T + sigma W_T)| averaged over
// paths, on the factor-coarsened grid.  Strong-order-1/2 oracle for the
// geometric Brownian motion model.
ErrorEstimate gbm_terminal_error_mc(const SdeModel& model,
                                    std::span<const double> x0,
                                    const GridSpec& grid_fine,
                                    std::int64_t factor, std::int64_t n_paths,
                                    std::uint64_t seed);

// Mean and standard error of a sample, reduced in index order.
std::pair<double, double> mean_and_stderr(std::span<const double> values);

}  // namespace sem
