#include "sem/engine.hpp"

#include <cmath>

#include "sem/errors.hpp"
#include "sem/parallel.hpp"

namespace sem {

namespace {

constexpr int kMaxDim = 8;

inline void check_dims(const SdeModel& model, const BrownianTable& table,
                       const char* where) {
  if (table.noise_dim_m != model.noise_dim_m)
    throw ConfigError(std::string(where) +
                      ": table noise dimension does not match the model");
  if (model.dim_d > kMaxDim || model.noise_dim_m > kMaxDim)
    throw ConfigError(std::string(where) + ": dimension exceeds engine limit");
}

}  // namespace

void em_step(const SdeModel& model, std::span<const double> x, double dt,
             std::span<const double> dw, std::span<double> out,
             std::int64_t step_index) {
  const int d = model.dim_d;
  const int m = model.noise_dim_m;
  double b[kMaxDim];
  double sig[kMaxDim * kMaxDim];
  model.eval_drift(x, {b, static_cast<std::size_t>(d)});
  model.eval_diffusion(x, {sig, static_cast<std::size_t>(d) *
                                    static_cast<std::size_t>(m)});
  for (int i = 0; i < d; ++i) {
    double acc = x[i] + b[i] * dt;
    const double* row = sig + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) acc += row[j] * dw[j];
    if (!std::isfinite(acc))
      throw NumericalError("engine::em_step: non-finite state", step_index);
    out[i] = acc;
  }
}

Trajectory simulate(const SdeModel& model, std::span<const double> x0,
                    const BrownianTable& table) {
  check_dims(model, table, "engine::simulate");
  if (static_cast<int>(x0.size()) != model.dim_d)
    throw ConfigError("engine::simulate: x0 dimension does not match the model");

  const int d = model.dim_d;
  Trajectory traj;
  traj.grid = table.grid;
  traj.dim = d;
  traj.model_label = model.label;
  traj.states.resize(static_cast<std::size_t>(table.grid.n_steps + 1) * d);
  for (int i = 0; i < d; ++i) traj.states[static_cast<std::size_t>(i)] = x0[i];

  for (std::int64_t k = 0; k < table.grid.n_steps; ++k) {
    const double* cur = traj.states.data() + static_cast<std::size_t>(k) * d;
    double* nxt = traj.states.data() + static_cast<std::size_t>(k + 1) * d;
    try {
      em_step(model, {cur, static_cast<std::size_t>(d)}, table.grid.dt,
              {table.row(k), static_cast<std::size_t>(model.noise_dim_m)},
              {nxt, static_cast<std::size_t>(d)}, k);
    } catch (const NumericalError&) {
      throw NumericalError("engine::simulate: non-finite state", k,
                           table.path_index);
    }
  }
  return traj;
}

double coupled_sup_error(const SdeModel& model, std::span<const double> x0,
                         const BrownianTable& fine_table, std::int64_t factor,
                         double beta) {
  if (!(beta > 0.0 && beta < 2.0))
    throw ConfigError("engine::coupled_sup_error: beta must lie in (0, 2)");
  check_dims(model, fine_table, "engine::coupled_sup_error");
  if (factor < 1 || fine_table.grid.n_steps % factor != 0)
    throw ConfigError(
        "engine::coupled_sup_error: factor must divide the fine step count");

  // Both chains advance through the same fine increments in the same order:
  // the coarse chain keeps its coefficients frozen at the last coarse node,
  // which realizes the coarse-grid scheme and couples the noise terms so
  // tightly that additive pure noise cancels to the bit.
  const int d = model.dim_d;
  const int m = model.noise_dim_m;
  const double dt = fine_table.grid.dt;
  double xf[kMaxDim], xc[kMaxDim], tmp[kMaxDim];
  double bc[kMaxDim], sc[kMaxDim * kMaxDim];
  for (int i = 0; i < d; ++i) xf[i] = xc[i] = x0[i];

  double sup_sq = 0.0;
  for (std::int64_t j = 0; j < fine_table.grid.n_steps; ++j) {
    if (j % factor == 0) {
      model.eval_drift({xc, static_cast<std::size_t>(d)},
                       {bc, static_cast<std::size_t>(d)});
      model.eval_diffusion({xc, static_cast<std::size_t>(d)},
                           {sc, static_cast<std::size_t>(d) * m});
    }
    const double* dw = fine_table.row(j);
    try {
      em_step(model, {xf, static_cast<std::size_t>(d)}, dt,
              {dw, static_cast<std::size_t>(m)},
              {tmp, static_cast<std::size_t>(d)}, j);
    } catch (const NumericalError&) {
      throw NumericalError("engine::coupled_sup_error: non-finite state", j,
                           fine_table.path_index);
    }
    for (int i = 0; i < d; ++i) xf[i] = tmp[i];
    for (int i = 0; i < d; ++i) {
      double acc = xc[i] + bc[i] * dt;
      const double* row = sc + static_cast<std::size_t>(i) * m;
      for (int c = 0; c < m; ++c) acc += row[c] * dw[c];
      if (!std::isfinite(acc))
        throw NumericalError("engine::coupled_sup_error: non-finite state", j,
                             fine_table.path_index);
      xc[i] = acc;
    }
    if ((j + 1) % factor == 0) {
      double dist_sq = 0.0;
      for (int i = 0; i < d; ++i) {
        const double diff = xf[i] - xc[i];
        dist_sq += diff * diff;
      }
      if (dist_sq > sup_sq) sup_sq = dist_sq;
    }
  }
  return std::pow(std::sqrt(sup_sq), beta);
}

std::vector<double> coupled_sup_error_paths(const SdeModel& model,
                                            std::span<const double> x0,
                                            const GridSpec& grid_fine,
                                            std::int64_t factor, double beta,
                                            std::int64_t n_paths,
                                            std::uint64_t seed) {
  std::vector<double> values(static_cast<std::size_t>(n_paths));
  std::vector<double> x0_copy(x0.begin(), x0.end());
  parallel_for(n_paths, [&](std::int64_t path) {
    const BrownianTable table =
        generate_table(seed, path, grid_fine, model.noise_dim_m);
    values[static_cast<std::size_t>(path)] =
        coupled_sup_error(model, x0_copy, table, factor, beta);
  });
  return values;
}

std::pair<double, double> mean_and_stderr(std::span<const double> values) {
  const auto n = static_cast<std::int64_t>(values.size());
  if (n == 0) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) {
    const double dev = v - mean;
    ss += dev * dev;
  }
  const double std_error =
      std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
  return {mean, std_error};
}

ErrorEstimate strong_error_mc(const SdeModel& model, std::span<const double> x0,
                              const GridSpec& grid_fine, std::int64_t factor,
                              double beta, std::int64_t n_paths,
                              std::uint64_t seed) {
  if (n_paths < 2)
    throw ConfigError("engine::strong_error_mc: need n_paths >= 2");
  const std::vector<double> values =
      coupled_sup_error_paths(model, x0, grid_fine, factor, beta, n_paths, seed);
  const auto [mean, std_error] = mean_and_stderr(values);
  ErrorEstimate est;
  est.beta = beta;
  est.mean = mean;
  est.std_error = std_error;
  est.n_paths = n_paths;
  est.delta = grid_fine.dt * static_cast<double>(factor);
  est.delta_ref = grid_fine.dt;
  return est;
}

ErrorEstimate gbm_terminal_error_mc(const SdeModel& model,
                                    std::span<const double> x0,
                                    const GridSpec& grid_fine,
                                    std::int64_t factor, std::int64_t n_paths,
                                    std::uint64_t seed) {
  if (n_paths < 2)
    throw ConfigError("engine::gbm_terminal_error_mc: need n_paths >= 2");
  if (model.dim_d != 1 || model.gbm_sigma == 0.0)
    throw ConfigError(
        "engine::gbm_terminal_error_mc: model has no closed-form solution");
  const double mu = model.gbm_mu;
  const double sigma = model.gbm_sigma;
  const double T = grid_fine.horizon_T;
  std::vector<double> values(static_cast<std::size_t>(n_paths));
  const double start = x0[0];
  parallel_for(n_paths, [&](std::int64_t path) {
    const BrownianTable fine = generate_table(seed, path, grid_fine, 1);
    const BrownianTable table = coarsen(fine, factor);
    double w_total = 0.0;
    for (std::int64_t k = 0; k < table.grid.n_steps; ++k)
      w_total += table.at(k, 0);
    const Trajectory traj = simulate(model, {&start, 1}, table);
    const double exact =
        start * std::exp((mu - 0.5 * sigma * sigma) * T + sigma * w_total);
    values[static_cast<std::size_t>(path)] =
        std::fabs(traj.state(table.grid.n_steps)[0] - exact);
  });
  const auto [mean, std_error] = mean_and_stderr(values);
  ErrorEstimate est;
  est.beta = 1.0;
  est.mean = mean;
  est.std_error = std_error;
  est.n_paths = n_paths;
  est.delta = grid_fine.dt * static_cast<double>(factor);
  est.delta_ref = grid_fine.dt;
  return est;
}

}  // namespace sem
