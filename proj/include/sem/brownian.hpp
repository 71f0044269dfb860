#pragma once

#include <cstdint>
#include <vector>

#include "sem/grid.hpp"
#include "sem/rng.hpp"

namespace sem {

// Brownian increments on a uniform grid, one row per step, one column per
// noise coordinate.  Entries are N(0, dt) draws from the keyed counter
// stream, so regenerating with identical (seed, path_index, grid, m)
// reproduces identical bits.  Tables are immutable after construction.
struct BrownianTable {
  GridSpec grid;
  int noise_dim_m = 1;
  std::uint64_t seed = 0;
  std::int64_t path_index = 0;
  std::vector<double> increments;  // n_steps x m, row-major

  double at(std::int64_t step, int coord) const {
    return increments[static_cast<std::size_t>(step) *
                          static_cast<std::size_t>(noise_dim_m) +
                      static_cast<std::size_t>(coord)];
  }
  const double* row(std::int64_t step) const {
    return increments.data() +
           static_cast<std::size_t>(step) * static_cast<std::size_t>(noise_dim_m);
  }
};

BrownianTable generate_table(std::uint64_t seed, std::int64_t path_index,
                             const GridSpec& grid, int m);

// Merge blocks of `factor` consecutive fine increments into one coarse
// increment, summing in ascending step order so the coupling between the
// fine and coarse grids is exact and bit-reproducible.
BrownianTable coarsen(const BrownianTable& table, std::int64_t factor);

}  // namespace sem
