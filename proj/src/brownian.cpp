#include "sem/brownian.hpp"

#include <cmath>

#include "sem/errors.hpp"

namespace sem {

BrownianTable generate_table(std::uint64_t seed, std::int64_t path_index,
                             const GridSpec& grid, int m) {
  if (!(grid.horizon_T > 0.0) || grid.n_steps < 1)
    throw ConfigError("randomness::generate_table: invalid grid");
  if (m < 1)
    throw ConfigError("randomness::generate_table: noise dimension must be >= 1");

  BrownianTable table;
  table.grid = grid;
  table.noise_dim_m = m;
  table.seed = seed;
  table.path_index = path_index;
  table.increments.resize(static_cast<std::size_t>(grid.n_steps) *
                          static_cast<std::size_t>(m));
  const double sqrt_dt = std::sqrt(grid.dt);
  std::size_t idx = 0;
  for (std::int64_t step = 0; step < grid.n_steps; ++step)
    for (int coord = 0; coord < m; ++coord)
      table.increments[idx++] =
          sqrt_dt * keyed_normal(seed, path_index, step, coord);
  return table;
}

BrownianTable coarsen(const BrownianTable& table, std::int64_t factor) {
  if (factor < 1 || table.grid.n_steps % factor != 0)
    throw ConfigError(
        "randomness::coarsen: factor must divide the number of fine steps");
  if (factor == 1) return table;

  BrownianTable out;
  out.grid = make_grid(table.grid.horizon_T, table.grid.n_steps / factor);
  out.noise_dim_m = table.noise_dim_m;
  out.seed = table.seed;
  out.path_index = table.path_index;
  out.increments.assign(static_cast<std::size_t>(out.grid.n_steps) *
                            static_cast<std::size_t>(out.noise_dim_m),
                        0.0);
  const int m = table.noise_dim_m;
  for (std::int64_t k = 0; k < out.grid.n_steps; ++k) {
    double* dst = out.increments.data() + static_cast<std::size_t>(k) * m;
    for (std::int64_t j = 0; j < factor; ++j) {
      const double* src = table.row(k * factor + j);
      for (int c = 0; c < m; ++c) dst[c] += src[c];
    }
  }
  return out;
}

}  // namespace sem
