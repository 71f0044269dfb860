#include "sem/estimates.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sem/brownian.hpp"
#include "sem/constants.hpp"
#include "sem/errors.hpp"
#include "sem/parallel.hpp"

namespace sem {

namespace {

constexpr int kMaxDim = 8;

// Walks the continuous-time chain over one path: for every step k and every
// sub-index j in [0, kSubSteps) calls visit(k, j, t, x) with
//   x = X_k + b(X_k) (t - k delta) + sigma(X_k) (W_t - W_{k delta}),
// where the sub-grid Brownian values are partial sums of the same fine
// increments whose block sums drive the chain itself.
template <typename Visitor>
void walk_substeps(const SdeModel& model, std::span<const double> x0,
                   const GridSpec& grid, std::int64_t path, std::uint64_t seed,
                   int sub_steps, Visitor&& visit) {
  const int d = model.dim_d;
  const int m = model.noise_dim_m;
  const GridSpec fine_grid =
      make_grid(grid.horizon_T, grid.n_steps * sub_steps);
  const BrownianTable fine = generate_table(seed, path, fine_grid, m);
  const double dt_sub = fine_grid.dt;

  double x[kMaxDim], b[kMaxDim], sig[kMaxDim * kMaxDim], w[kMaxDim],
      xt[kMaxDim];
  for (int i = 0; i < d; ++i) x[i] = x0[i];

  for (std::int64_t k = 0; k < grid.n_steps; ++k) {
    model.eval_drift({x, static_cast<std::size_t>(d)},
                     {b, static_cast<std::size_t>(d)});
    model.eval_diffusion({x, static_cast<std::size_t>(d)},
                         {sig, static_cast<std::size_t>(d) * m});
    for (int c = 0; c < m; ++c) w[c] = 0.0;
    for (int j = 0; j < sub_steps; ++j) {
      const double tau = static_cast<double>(j) * dt_sub;
      for (int i = 0; i < d; ++i) {
        double acc = x[i] + b[i] * tau;
        const double* row = sig + static_cast<std::size_t>(i) * m;
        for (int c = 0; c < m; ++c) acc += row[c] * w[c];
        xt[i] = acc;
      }
      visit(k, j, static_cast<double>(k) * grid.dt + tau,
            std::span<const double>{xt, static_cast<std::size_t>(d)});
      const double* fine_row = fine.row(k * sub_steps + j);
      for (int c = 0; c < m; ++c) w[c] += fine_row[c];
    }
    for (int i = 0; i < d; ++i) {
      double acc = x[i] + b[i] * grid.dt;
      const double* row = sig + static_cast<std::size_t>(i) * m;
      for (int c = 0; c < m; ++c) acc += row[c] * w[c];
      if (!std::isfinite(acc))
        throw NumericalError("estimates: non-finite chain state", k, path);
      xt[i] = acc;
    }
    for (int i = 0; i < d; ++i) x[i] = xt[i];
  }
}

struct BoundInputs {
  double gamma0_val = 0.0;
  double alpha0_val = 0.0;      // +inf when past double range
  double hat_alpha0_val = 0.0;  // +inf when past double range
};

BoundInputs bound_inputs(const SdeModel& model) {
  if (!model.assumptions.in_k1(model.dim_d))
    throw ConfigError(
        "estimates: model (p, q) violates the Krylov-class condition "
        "d/p + 2/q < 2");
  const ConstantsReport rep =
      constants_report(model.assumptions, model.dim_d, model.noise_dim_m);
  return BoundInputs{rep.gamma0.value, rep.alpha0.value, rep.hat_alpha0.value};
}

std::vector<double> functional_per_path(const SdeModel& model,
                                        const ScalarField& f,
                                        std::span<const double> x0,
                                        const GridSpec& grid,
                                        std::int64_t n_paths,
                                        std::uint64_t seed, int sub_steps) {
  std::vector<double> values(static_cast<std::size_t>(n_paths));
  std::vector<double> start(x0.begin(), x0.end());
  const double dt_sub = grid.dt / sub_steps;
  parallel_for(n_paths, [&](std::int64_t path) {
    double acc = 0.0;
    walk_substeps(model, start, grid, path, seed, sub_steps,
                  [&](std::int64_t, int, double t, std::span<const double> x) {
                    acc += std::fabs(f.f(t, x)) * dt_sub;
                  });
    values[static_cast<std::size_t>(path)] = acc;
  });
  return values;
}

}  // namespace

KrylovReport krylov_functional_mc(const SdeModel& model, const ScalarField& f,
                                  std::span<const double> x0,
                                  const GridSpec& grid, std::int64_t n_paths,
                                  std::uint64_t seed, int sub_steps) {
  const BoundInputs bounds = bound_inputs(model);
  const std::vector<double> values =
      functional_per_path(model, f, x0, grid, n_paths, seed, sub_steps);
  const auto [mean, se] = mean_and_stderr(values);

  KrylovReport rep;
  rep.lam = 0.0;
  rep.functional_mean = mean;
  rep.functional_ci95 = 1.96 * se;
  rep.onestep_bound = bounds.alpha0_val * f.lpq_norm *
                      std::pow(grid.horizon_T, 1.0 / bounds.gamma0_val);
  rep.exp_mean = 1.0;
  rep.exp_ci95 = 0.0;
  rep.theoretical_exp_bound = 2.0;
  rep.passed = rep.exp_mean + rep.exp_ci95 <= rep.theoretical_exp_bound;
  return rep;
}

KrylovReport khasminskii_mc(const SdeModel& model, const ScalarField& f,
                            double lam, std::span<const double> x0,
                            const GridSpec& grid, std::int64_t n_paths,
                            std::uint64_t seed, bool use_exact_proxy) {
  if (!(lam > 0.0))
    throw ConfigError("estimates::khasminskii_mc: lambda must be > 0");
  const BoundInputs bounds = bound_inputs(model);
  const GridSpec run_grid =
      use_exact_proxy ? make_grid(grid.horizon_T, grid.n_steps * 16) : grid;
  const std::vector<double> values =
      functional_per_path(model, f, x0, run_grid, n_paths, seed, kSubSteps);

  std::vector<double> exp_values(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    exp_values[i] = std::exp(lam * values[i]);
    if (!std::isfinite(exp_values[i]))
      throw NumericalError(
          "estimates::khasminskii_mc: exponential moment overflowed on a path",
          -1, static_cast<std::int64_t>(i));
  }
  const auto [fmean, fse] = mean_and_stderr(values);
  const auto [emean, ese] = mean_and_stderr(exp_values);

  KrylovReport rep;
  rep.lam = lam;
  rep.functional_mean = fmean;
  rep.functional_ci95 = 1.96 * fse;
  rep.exp_mean = emean;
  rep.exp_ci95 = 1.96 * ese;
  const double alpha_for_bound =
      use_exact_proxy ? bounds.hat_alpha0_val : bounds.alpha0_val;
  rep.theoretical_exp_bound = khasminskii_bound(
      lam, f.lpq_norm, alpha_for_bound, bounds.gamma0_val, grid.horizon_T);
  rep.onestep_bound = alpha_for_bound * f.lpq_norm *
                      std::pow(grid.horizon_T, 1.0 / bounds.gamma0_val);
  rep.passed = rep.exp_mean + rep.exp_ci95 <= rep.theoretical_exp_bound;
  return rep;
}

std::pair<double, double> drift_increment_mc(const SdeModel& model,
                                             std::span<const double> x0,
                                             const GridSpec& grid,
                                             std::int64_t n_paths,
                                             std::uint64_t seed) {
  const int d = model.dim_d;
  const double dt_sub = grid.dt / kSubSteps;
  std::vector<double> values(static_cast<std::size_t>(n_paths));
  std::vector<double> start(x0.begin(), x0.end());
  parallel_for(n_paths, [&](std::int64_t path) {
    double acc = 0.0;
    double anchor_b[kMaxDim], bt[kMaxDim];
    walk_substeps(
        model, start, grid, path, seed, kSubSteps,
        [&](std::int64_t, int j, double, std::span<const double> x) {
          model.eval_drift(x, {bt, static_cast<std::size_t>(d)});
          if (j == 0) {  // the anchor itself: |b - b|^2 = 0
            for (int i = 0; i < d; ++i) anchor_b[i] = bt[i];
            return;
          }
          double diff_sq = 0.0;
          for (int i = 0; i < d; ++i) {
            const double diff = bt[i] - anchor_b[i];
            diff_sq += diff * diff;
          }
          acc += diff_sq * dt_sub;
        });
    values[static_cast<std::size_t>(path)] = acc;
  });
  const auto [mean, se] = mean_and_stderr(values);
  return {mean, 1.96 * se};
}

DensityCheck density_check(const SdeModel& model, std::span<const double> x0,
                           const GridSpec& grid, std::int64_t anchor_j,
                           double t, std::int64_t n_paths, int n_bins,
                           std::uint64_t seed) {
  const int d = model.dim_d;
  if (d > 2)
    throw ConfigError(
        "estimates::density_check: histograms supported for d <= 2 only");
  const double delta = grid.dt;
  const double elapsed = t - static_cast<double>(anchor_j) * delta;
  if (!(elapsed > 0.0))
    throw ConfigError("estimates::density_check: need t > anchor_j * delta");
  if (n_bins < 1)
    throw ConfigError("estimates::density_check: need n_bins >= 1");

  DensityCheck check;
  check.time_t = t;
  check.anchor_j = anchor_j;
  if (n_paths == 0) {
    check.degenerate = true;
    return check;
  }

  const auto n_full = static_cast<std::int64_t>(elapsed / delta + 1e-9);
  const double rem = elapsed - static_cast<double>(n_full) * delta;
  const bool partial = rem > 1e-12 * delta;
  // the chain started at a node is time-homogeneous: run it for `elapsed`
  const std::int64_t sim_steps = n_full + (partial ? 1 : 0);
  const GridSpec sim_grid =
      make_grid(delta * static_cast<double>(sim_steps), sim_steps);

  const AssumptionData& a = model.assumptions;
  const double half_range =
      (std::isfinite(a.b_sup) ? a.b_sup : 0.0) * elapsed +
      6.0 * std::sqrt(a.lambda_upper * elapsed);
  const double width = 2.0 * half_range / n_bins;
  const double bin_volume = std::pow(width, d);

  std::vector<double> terminal(static_cast<std::size_t>(n_paths) * d);
  std::vector<double> start(x0.begin(), x0.end());
  parallel_for(n_paths, [&](std::int64_t path) {
    const BrownianTable table =
        generate_table(seed, path, sim_grid, model.noise_dim_m);
    double x[kMaxDim], xn[kMaxDim], dw[kMaxDim];
    for (int i = 0; i < d; ++i) x[i] = start[i];
    for (std::int64_t k = 0; k < n_full; ++k) {
      em_step(model, {x, static_cast<std::size_t>(d)}, delta,
              {table.row(k), static_cast<std::size_t>(model.noise_dim_m)},
              {xn, static_cast<std::size_t>(d)}, k);
      for (int i = 0; i < d; ++i) x[i] = xn[i];
    }
    if (partial) {
      // N(0, rem) increment derived from the spare row by exact scaling
      const double scale = std::sqrt(rem / delta);
      const double* row = table.row(n_full);
      for (int c = 0; c < model.noise_dim_m; ++c) dw[c] = row[c] * scale;
      em_step(model, {x, static_cast<std::size_t>(d)}, rem,
              {dw, static_cast<std::size_t>(model.noise_dim_m)},
              {xn, static_cast<std::size_t>(d)}, n_full);
      for (int i = 0; i < d; ++i) x[i] = xn[i];
    }
    for (int i = 0; i < d; ++i)
      terminal[static_cast<std::size_t>(path) * d + i] = x[i];
  });

  const ConstantsReport rep =
      constants_report(model.assumptions, d, model.noise_dim_m);
  const double kappa0_val = rep.kappa0.value;
  const double lambda3_val = rep.lambda3.value;  // +inf past double range
  const double envelope_denom =
      std::pow(2.0 * M_PI * a.lambda_lower * elapsed, 0.5 * d);

  const std::int64_t cells =
      d == 1 ? n_bins : static_cast<std::int64_t>(n_bins) * n_bins;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
  for (std::int64_t path = 0; path < n_paths; ++path) {
    const double* x = terminal.data() + static_cast<std::size_t>(path) * d;
    std::int64_t cell = 0;
    bool inside = true;
    for (int i = 0; i < d; ++i) {
      const double rel = (x[i] - (x0[i] - half_range)) / width;
      if (rel < 0.0 || rel >= n_bins) {
        inside = false;
        break;
      }
      cell = cell * n_bins + static_cast<std::int64_t>(rel);
    }
    if (inside) ++counts[static_cast<std::size_t>(cell)];
  }

  check.bins.reserve(static_cast<std::size_t>(cells));
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    DensityBin bin;
    bin.width = width;
    std::int64_t rest = cell;
    bin.center.resize(d);
    for (int i = d - 1; i >= 0; --i) {
      const std::int64_t idx = rest % n_bins;
      rest /= n_bins;
      bin.center[static_cast<std::size_t>(i)] =
          x0[i] - half_range + (static_cast<double>(idx) + 0.5) * width;
    }
    bin.count = counts[static_cast<std::size_t>(cell)];
    bin.empirical_density = static_cast<double>(bin.count) /
                            (static_cast<double>(n_paths) * bin_volume);
    double dist_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double diff = bin.center[static_cast<std::size_t>(i)] - x0[i];
      dist_sq += diff * diff;
    }
    bin.bound_value = lambda3_val *
                      std::exp(-dist_sq / (kappa0_val * elapsed)) /
                      envelope_denom;
    const double p_hat = static_cast<double>(bin.count) / n_paths;
    bin.slack_3sigma =
        3.0 * std::sqrt(p_hat * (1.0 - p_hat) / n_paths) / bin_volume;
    if (bin.empirical_density - bin.slack_3sigma > bin.bound_value)
      ++check.violations;
    check.bins.push_back(std::move(bin));
  }
  return check;
}

std::string density_csv(const DensityCheck& check) {
  std::ostringstream os;
  os.precision(17);
  os << "center,width,count,empirical_density,bound_value,slack_3sigma\n";
  for (const auto& bin : check.bins) {
    for (std::size_t i = 0; i < bin.center.size(); ++i)
      os << (i ? ";" : "") << bin.center[i];
    os << ',' << bin.width << ',' << bin.count << ',' << bin.empirical_density
       << ',' << bin.bound_value << ',' << bin.slack_3sigma << '\n';
  }
  return os.str();
}

std::string krylov_csv(std::span<const KrylovReport> reports) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda,functional_mean,functional_ci95,exp_mean,exp_ci95,"
        "theoretical_exp_bound,onestep_bound,passed\n";
  for (const auto& r : reports)
    os << r.lam << ',' << r.functional_mean << ',' << r.functional_ci95 << ','
       << r.exp_mean << ',' << r.exp_ci95 << ',' << r.theoretical_exp_bound
       << ',' << r.onestep_bound << ',' << (r.passed ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace sem
