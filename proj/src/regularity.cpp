#include "sem/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sem/errors.hpp"
#include "sem/parallel.hpp"
#include "sem/quadrature.hpp"

namespace sem {

namespace {

constexpr double kTailCut = 9.0;  // e^{-81} is below double noise here

// |b(sqrt(s) u + y) - b(sqrt(s) u + z)|^2 for 1-d models.
double sq_diff_1d(const SdeModel& model, double u, double sqrt_s, double y,
                  double z) {
  const double xy = sqrt_s * u + y;
  const double xz = sqrt_s * u + z;
  double by, bz;
  model.eval_drift({&xy, 1}, {&by, 1});
  model.eval_drift({&xz, 1}, {&bz, 1});
  const double diff = by - bz;
  return diff * diff;
}

double a2_value_1d(const SdeModel& model, double s, double y, double z,
                   int nodes) {
  const double sqrt_s = std::sqrt(s);
  if (!model.drift_jumps.empty()) {
    std::vector<double> breaks;
    breaks.reserve(2 * model.drift_jumps.size());
    for (double a : model.drift_jumps) {
      breaks.push_back((a - y) / sqrt_s);
      breaks.push_back((a - z) / sqrt_s);
    }
    auto f = [&](double u) {
      return sq_diff_1d(model, u, sqrt_s, y, z) * std::exp(-u * u);
    };
    return integrate_segmented(f, -kTailCut, kTailCut, std::move(breaks),
                               nodes);
  }
  const QuadRule& rule = gauss_hermite(nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * sq_diff_1d(model, rule.nodes[i], sqrt_s, y, z);
  return sum;
}

double a2_value_2d(const SdeModel& model, double s,
                   std::span<const double> y, std::span<const double> z,
                   int nodes) {
  const double sqrt_s = std::sqrt(s);
  const QuadRule& rule = gauss_hermite(nodes);
  double sum = 0.0;
  double xy[2], xz[2], by[2], bz[2];
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      xy[0] = sqrt_s * rule.nodes[i] + y[0];
      xy[1] = sqrt_s * rule.nodes[j] + y[1];
      xz[0] = sqrt_s * rule.nodes[i] + z[0];
      xz[1] = sqrt_s * rule.nodes[j] + z[1];
      model.eval_drift({xy, 2}, {by, 2});
      model.eval_drift({xz, 2}, {bz, 2});
      const double d0 = by[0] - bz[0];
      const double d1 = by[1] - bz[1];
      inner += rule.weights[j] * (d0 * d0 + d1 * d1);
    }
    sum += rule.weights[i] * inner;
  }
  return sum;
}

}  // namespace

ModulusSample a2_modulus(const SdeModel& model, double s,
                         std::span<const double> y, std::span<const double> z) {
  if (!(s > 0.0))
    throw ConfigError("regularity::a2_modulus: s must be > 0");
  if (model.dim_d > 2)
    throw ConfigError("regularity::a2_modulus: only d <= 2 supported");

  ModulusSample sample;
  sample.s = s;
  sample.y.assign(y.begin(), y.end());
  sample.z.assign(z.begin(), z.end());

  double coarse, fine;
  if (model.dim_d == 1) {
    coarse = a2_value_1d(model, s, y[0], z[0], 128);
    fine = a2_value_1d(model, s, y[0], z[0], 256);
  } else {
    coarse = a2_value_2d(model, s, y, z, 64);
    fine = a2_value_2d(model, s, y, z, 128);
  }
  sample.value = fine;
  sample.quadrature_error_estimate = std::fabs(fine - coarse);
  return sample;
}

AlphaFit fit_alpha(const SdeModel& model, std::span<const double> s_list,
                   std::span<const double> offset_list,
                   std::span<const double> direction) {
  if (offset_list.size() < 3)
    throw ConfigError("regularity::fit_alpha: need at least 3 offsets");
  const auto [min_it, max_it] =
      std::minmax_element(offset_list.begin(), offset_list.end());
  if (!(*max_it >= 10.0 * *min_it))
    throw ConfigError(
        "regularity::fit_alpha: offsets must span at least one decade");

  const int d = model.dim_d;
  double norm = 0.0;
  for (double c : direction) norm += c * c;
  norm = std::sqrt(norm);
  if (!(norm > 0.0))
    throw ConfigError("regularity::fit_alpha: direction must be nonzero");

  AlphaFit fit;
  fit.offsets_used.assign(offset_list.begin(), offset_list.end());

  // log-log samples per s
  std::vector<std::vector<double>> logs(s_list.size());
  std::vector<double> log_off;
  for (double off : offset_list) log_off.push_back(std::log(off));

  bool any_positive = false;
  for (std::size_t si = 0; si < s_list.size(); ++si) {
    for (double off : offset_list) {
      std::vector<double> y(d, 0.0), z(d);
      for (int i = 0; i < d; ++i) z[i] = off * direction[i] / norm;
      const ModulusSample m = a2_modulus(model, s_list[si], y, z);
      if (m.value > 1e-300) any_positive = true;
      logs[si].push_back(m.value > 1e-300
                             ? std::log(m.value)
                             : -std::numeric_limits<double>::infinity());
    }
  }
  if (!any_positive) {
    fit.degenerate = true;
    fit.alpha_hat = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }

  // Per-s least squares; pooled r^2 with per-s intercepts.
  double slope_sum = 0.0;
  double pooled_ss_res = 0.0, pooled_ss_tot = 0.0;
  const double x_mean =
      std::accumulate(log_off.begin(), log_off.end(), 0.0) / log_off.size();
  for (std::size_t si = 0; si < s_list.size(); ++si) {
    const auto& ly = logs[si];
    const double y_mean =
        std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < ly.size(); ++k) {
      sxx += (log_off[k] - x_mean) * (log_off[k] - x_mean);
      sxy += (log_off[k] - x_mean) * (ly[k] - y_mean);
    }
    const double slope = sxy / sxx;
    slope_sum += slope;
    const double intercept = y_mean - slope * x_mean;
    fit.log_intercepts_by_s.push_back(intercept);
    for (std::size_t k = 0; k < ly.size(); ++k) {
      const double resid = ly[k] - (intercept + slope * log_off[k]);
      pooled_ss_res += resid * resid;
      pooled_ss_tot += (ly[k] - y_mean) * (ly[k] - y_mean);
    }
  }
  fit.alpha_hat = slope_sum / static_cast<double>(s_list.size());
  fit.r_squared = pooled_ss_tot > 0.0 ? 1.0 - pooled_ss_res / pooled_ss_tot : 1.0;
  return fit;
}

double gb_modulus(const SdeModel& model, double r, double s,
                  std::span<const double> z) {
  if (!(r > 0.0) || !(s > 0.0))
    throw ConfigError("regularity::gb_modulus: r and s must be > 0");
  if (model.dim_d != 1)
    throw ConfigError("regularity::gb_modulus: only d = 1 supported");

  const double sqrt_s = std::sqrt(s);
  const double sqrt_r = std::sqrt(r);
  const double z0 = z[0];
  const int nodes = 64;

  auto inner = [&](double u) {
    const double x = z0 + sqrt_s * u;
    double bx;
    model.eval_drift({&x, 1}, {&bx, 1});
    auto g = [&](double v) {
      const double yv = x + sqrt_r * v;
      double by;
      model.eval_drift({&yv, 1}, {&by, 1});
      const double diff = bx - by;
      return diff * diff * std::exp(-v * v);
    };
    if (!model.drift_jumps.empty()) {
      std::vector<double> breaks;
      for (double a : model.drift_jumps) breaks.push_back((a - x) / sqrt_r);
      return integrate_segmented(g, -kTailCut, kTailCut, std::move(breaks),
                                 nodes);
    }
    const QuadRule& rule = gauss_hermite(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double yv = x + sqrt_r * rule.nodes[i];
      double by;
      model.eval_drift({&yv, 1}, {&by, 1});
      const double diff = bx - by;
      sum += rule.weights[i] * diff * diff;
    }
    return sum;
  };

  auto outer = [&](double u) { return inner(u) * std::exp(-u * u); };
  if (!model.drift_jumps.empty()) {
    std::vector<double> breaks;
    for (double a : model.drift_jumps) breaks.push_back((a - z0) / sqrt_s);
    return integrate_segmented(outer, -kTailCut, kTailCut, std::move(breaks),
                               nodes);
  }
  const QuadRule& rule = gauss_hermite(nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * inner(rule.nodes[i]);
  return sum;
}

double gagliardo_seminorm(const SdeModel& model, double p_exp, double theta,
                          double box_lo, double box_hi, std::int64_t grid) {
  if (!(theta > 0.0 && theta < 1.0))
    throw ConfigError("regularity::gagliardo_seminorm: theta must lie in (0,1)");
  if (!(p_exp >= 2.0))
    throw ConfigError("regularity::gagliardo_seminorm: p must be >= 2");
  if (!(box_hi > box_lo) || grid < 2)
    throw ConfigError("regularity::gagliardo_seminorm: degenerate box");
  if (model.dim_d != 1)
    throw ConfigError("regularity::gagliardo_seminorm: only d = 1 supported");

  const auto n = static_cast<std::size_t>(grid);
  const double h = (box_hi - box_lo) / static_cast<double>(grid);

  std::vector<double> bvals(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = box_lo + (static_cast<double>(i) + 0.5) * h;
    double b;
    model.eval_drift({&x, 1}, {&b, 1});
    bvals[i] = b;
  }

  // Terms grouped by the lattice separation m: |x_i - x_j| = m h exactly,
  // so the kernel weight is shared by every pair in the group.  The band
  // m = 0 is the excluded diagonal.
  const bool square = p_exp == 2.0;
  std::vector<double> group_sums(n, 0.0);
  parallel_for(static_cast<std::int64_t>(n) - 1, [&](std::int64_t idx) {
    const auto m = static_cast<std::size_t>(idx) + 1;
    const double* lo_ptr = bvals.data();
    const double* hi_ptr = bvals.data() + m;
    double acc = 0.0;
    const std::size_t count = n - m;
    if (square) {
      for (std::size_t i = 0; i < count; ++i) {
        const double diff = lo_ptr[i] - hi_ptr[i];
        acc += diff * diff;
      }
    } else {
      for (std::size_t i = 0; i < count; ++i)
        acc += std::pow(std::fabs(lo_ptr[i] - hi_ptr[i]), p_exp);
    }
    group_sums[m] = acc;
  });

  double integral = 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    const double dist = static_cast<double>(m) * h;
    // factor 2: ordered pairs (i, j) and (j, i)
    integral += 2.0 * group_sums[m] * std::pow(dist, -(1.0 + p_exp * theta)) *
                h * h;
  }
  return std::pow(integral, 1.0 / p_exp);
}

}  // namespace sem
