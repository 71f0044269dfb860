#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sem/errors.hpp"

namespace sem {

// Metadata backing assumptions (A1)-(A3): sup norm and Lipschitz constant of
// the coefficients, ellipticity window of sigma*sigma^T, the modulus
// exponent alpha, and the (p, q) integrability pair.
struct AssumptionData {
  double b_sup = 0.0;         // ||b||_inf
  double l0 = 0.0;            // Lipschitz constant of sigma
  double lambda_lower = 1.0;  // smallest eigenvalue of sigma*sigma^T
  double lambda_upper = 1.0;  // largest eigenvalue of sigma*sigma^T
  double alpha = 2.0;         // modulus exponent
  double p = 2.0;
  double q = 4.0;
  double horizon_T = 1.0;
  bool a1_integrable = true;  // |b|^2 in L^p holds

  // Membership in the Krylov class: d/p + 2/q < 2.
  bool in_k1(int d) const {
    return p > 1.0 && q > 1.0 && d / p + 2.0 / q < 2.0;
  }
  void validate() const;
};

using DriftFn = std::function<void(std::span<const double>, std::span<double>)>;
// out is d x m, row-major.
using DiffusionFn =
    std::function<void(std::span<const double>, std::span<double>)>;

struct SdeModel {
  int dim_d = 1;
  int noise_dim_m = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  AssumptionData assumptions;
  std::string label;
  bool oracle_only = false;  // violates (A1)/(A3); kept for closed-form checks
  // 1-d drift discontinuity locations, exposed so Gaussian quadrature can
  // split integration domains at the jumps.
  std::vector<double> drift_jumps;
  double gbm_mu = 0.0;
  double gbm_sigma = 0.0;

  void eval_drift(std::span<const double> x, std::span<double> out) const {
    drift(x, out);
  }
  void eval_diffusion(std::span<const double> x, std::span<double> out) const {
    diffusion(x, out);
  }
};

// Scalar test function for the occupation estimates, together with its
// L^p_q(T) norm (analytic where known, quadrature otherwise; never estimated
// from simulated paths).
struct ScalarField {
  std::function<double(double, std::span<const double>)> f;
  double lpq_norm = 0.0;
};

// Smooth radial cutoff: 1 on [0,1], 0 on [2,inf), quintic smoothstep blend
// in between (C^2, polynomial, exactly reproducible).
double smooth_cutoff(double r);

// d = m = 1, sigma == 1, drift = indicator of [a1, a2] (closed interval).
SdeModel indicator_drift(double a1, double a2);

// Drift multiplied by smooth_cutoff(|x|/k): unchanged on |x| <= k, zero for
// |x| >= 2k.
SdeModel truncate_drift(const SdeModel& model, double k);

// Closed-form bound on || |b_k|^2 ||_{L^p} for the truncated drift:
// (2^d pi^{d/2} / Gamma(d/2+1))^{1/p} k^{d/p} ||b||_inf^2.
double truncated_lp_bound(double k, double b_sup, int d, double p);

// Model catalog; selection by label from the CLI/config.
std::vector<SdeModel> builtin_models();
SdeModel builtin_model(const std::string& label);

// f = indicator of [a, b] on the line, constant in time; the L^p_q(T) norm
// has the closed form T^{1/q} (b-a)^{1/p}.
ScalarField indicator_field(double a, double b, double T, double p, double q);

// General field with the L^p_q(T) norm evaluated by tensor-product
// Gauss-Legendre quadrature over box^d x [0, T] (for fields without a
// closed-form norm; the norm is an input to the bounds, never estimated
// from simulated paths).
ScalarField make_field(std::function<double(double, std::span<const double>)> f,
                       int d, double box_lo, double box_hi, double T, double p,
                       double q, int nodes_per_dim = 64);

}  // namespace sem
