#include "sem/models.hpp"

#include <cmath>
#include <limits>

#include "sem/quadrature.hpp"

namespace sem {

void AssumptionData::validate() const {
  if (!(lambda_lower > 0.0) || !(lambda_upper >= lambda_lower))
    throw ConfigError(
        "models::AssumptionData: need 0 < lambda_lower <= lambda_upper");
  if (!(b_sup >= 0.0) || !(l0 >= 0.0))
    throw ConfigError("models::AssumptionData: b_sup and l0 must be >= 0");
  if (!(alpha > 0.0))
    throw ConfigError("models::AssumptionData: alpha must be > 0");
  if (!(horizon_T > 0.0))
    throw ConfigError("models::AssumptionData: horizon T must be > 0");
}

double smooth_cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double u = r - 1.0;
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  return 1.0 - s;
}

namespace {

DiffusionFn identity_diffusion(int d) {
  return [d](std::span<const double>, std::span<double> out) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(i) * d + j] = (i == j) ? 1.0 : 0.0;
  };
}

}  // namespace

SdeModel indicator_drift(double a1, double a2) {
  if (!(a1 < a2))
    throw ConfigError("models::indicator_drift: need a1 < a2");
  SdeModel model;
  model.dim_d = 1;
  model.noise_dim_m = 1;
  model.drift = [a1, a2](std::span<const double> x, std::span<double> out) {
    out[0] = (x[0] >= a1 && x[0] <= a2) ? 1.0 : 0.0;
  };
  model.diffusion = identity_diffusion(1);
  model.assumptions = AssumptionData{
      /*b_sup=*/1.0, /*l0=*/0.0, /*lambda_lower=*/1.0, /*lambda_upper=*/1.0,
      /*alpha=*/1.0, /*p=*/2.0, /*q=*/4.0, /*horizon_T=*/1.0,
      /*a1_integrable=*/true};
  model.label = "indicator-1d";
  model.drift_jumps = {a1, a2};
  return model;
}

SdeModel truncate_drift(const SdeModel& model, double k) {
  if (!(k > 0.0))
    throw ConfigError("models::truncate_drift: truncation level k must be > 0");
  SdeModel out = model;
  const int d = model.dim_d;
  const DriftFn base = model.drift;
  out.drift = [base, k, d](std::span<const double> x, std::span<double> b) {
    base(x, b);
    double norm_sq = 0.0;
    for (int i = 0; i < d; ++i) norm_sq += x[i] * x[i];
    const double psi = smooth_cutoff(std::sqrt(norm_sq) / k);
    for (int i = 0; i < d; ++i) b[i] *= psi;
  };
  out.assumptions.a1_integrable = true;  // b_k has compact support
  out.label = model.label + "|trunc";
  return out;
}

double truncated_lp_bound(double k, double b_sup, int d, double p) {
  if (!(k > 0.0))
    throw ConfigError("models::truncated_lp_bound: k must be > 0");
  if (!(p >= 1.0))
    throw ConfigError("models::truncated_lp_bound: p must be >= 1");
  const double ball_volume_factor =
      std::pow(2.0, d) * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
  return std::pow(ball_volume_factor, 1.0 / p) * std::pow(k, d / p) * b_sup *
         b_sup;
}

std::vector<SdeModel> builtin_models() {
  std::vector<SdeModel> catalog;

  {
    SdeModel m;
    m.dim_d = m.noise_dim_m = 1;
    m.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    m.diffusion = identity_diffusion(1);
    m.assumptions = AssumptionData{0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 4.0, 1.0, true};
    m.label = "zero";
    catalog.push_back(std::move(m));
  }
  {
    SdeModel m;
    m.dim_d = m.noise_dim_m = 1;
    m.drift = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    m.diffusion = identity_diffusion(1);
    // bounded drift, but |b|^2 is not integrable on the line
    m.assumptions = AssumptionData{1.0, 0.0, 1.0, 1.0, 2.0, 2.0, 4.0, 1.0, false};
    m.label = "constant";
    catalog.push_back(std::move(m));
  }
  catalog.push_back(indicator_drift(0.0, 1.0));
  {
    SdeModel m;
    m.dim_d = m.noise_dim_m = 1;
    m.drift = [](std::span<const double> x, std::span<double> out) {
      out[0] = std::sin(x[0]);
    };
    m.diffusion = identity_diffusion(1);
    m.assumptions = AssumptionData{1.0, 0.0, 1.0, 1.0, 2.0, 2.0, 4.0, 1.0, false};
    m.label = "sin";
    catalog.push_back(std::move(m));
  }
  {
    // Geometric Brownian motion: unbounded coefficients, kept only as the
    // closed-form oracle for the strong-order-1/2 sanity check.
    SdeModel m;
    m.dim_d = m.noise_dim_m = 1;
    const double mu = 0.05, sigma = 0.2;
    m.drift = [mu](std::span<const double> x, std::span<double> out) {
      out[0] = mu * x[0];
    };
    m.diffusion = [sigma](std::span<const double> x, std::span<double> out) {
      out[0] = sigma * x[0];
    };
    m.assumptions = AssumptionData{std::numeric_limits<double>::infinity(),
                                   0.2, 1.0, 1.0, 2.0, 2.0, 4.0, 1.0, false};
    m.label = "gbm";
    m.oracle_only = true;
    m.gbm_mu = mu;
    m.gbm_sigma = sigma;
    catalog.push_back(std::move(m));
  }
  {
    SdeModel m;
    m.dim_d = m.noise_dim_m = 2;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    m.drift = [inv_sqrt2](std::span<const double> x, std::span<double> out) {
      const bool inside =
          x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0;
      out[0] = out[1] = inside ? inv_sqrt2 : 0.0;
    };
    m.diffusion = identity_diffusion(2);
    m.assumptions = AssumptionData{1.0, 0.0, 1.0, 1.0, 1.0, 4.0, 4.0, 1.0, true};
    m.label = "indicator-box-2d";
    catalog.push_back(std::move(m));
  }
  return catalog;
}

SdeModel builtin_model(const std::string& label) {
  for (auto& m : builtin_models())
    if (m.label == label) return m;
  throw ConfigError("models::builtin_model: unknown model label '" + label +
                    "' (known: zero, constant, indicator-1d, sin, gbm, "
                    "indicator-box-2d)");
}

ScalarField indicator_field(double a, double b, double T, double p, double q) {
  if (!(a < b))
    throw ConfigError("models::indicator_field: need a < b");
  ScalarField field;
  field.f = [a, b](double, std::span<const double> x) {
    return (x[0] >= a && x[0] <= b) ? 1.0 : 0.0;
  };
  field.lpq_norm = std::pow(T, 1.0 / q) * std::pow(b - a, 1.0 / p);
  return field;
}

ScalarField make_field(std::function<double(double, std::span<const double>)> f,
                       int d, double box_lo, double box_hi, double T, double p,
                       double q, int nodes_per_dim) {
  if (d < 1 || d > 2)
    throw ConfigError("models::make_field: quadrature norm supports d <= 2");
  if (!(box_hi > box_lo) || !(T > 0.0))
    throw ConfigError("models::make_field: degenerate box or horizon");

  const QuadRule& rule = gauss_legendre(nodes_per_dim);
  const double mid = 0.5 * (box_lo + box_hi);
  const double len = 0.5 * (box_hi - box_lo);

  auto spatial_lp = [&](double t) {  // integral_box |f|^p dx
    double sum = 0.0;
    if (d == 1) {
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = mid + len * rule.nodes[i];
        sum += rule.weights[i] * std::pow(std::fabs(f(t, {&x, 1})), p);
      }
      return sum * len;
    }
    double pt[2];
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double inner = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        pt[0] = mid + len * rule.nodes[i];
        pt[1] = mid + len * rule.nodes[j];
        inner += rule.weights[j] * std::pow(std::fabs(f(t, {pt, 2})), p);
      }
      sum += rule.weights[i] * inner;
    }
    return sum * len * len;
  };

  double time_sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = 0.5 * T * (1.0 + rule.nodes[k]);
    time_sum += rule.weights[k] * std::pow(spatial_lp(t), q / p);
  }
  ScalarField field;
  field.f = std::move(f);
  field.lpq_norm = std::pow(time_sum * 0.5 * T, 1.0 / q);
  return field;
}

}  // namespace sem
