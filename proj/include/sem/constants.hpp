#pragma once

#include <string>

#include "sem/logspace.hpp"
#include "sem/models.hpp"

namespace sem {

// Every explicit constant of the convergence analysis, evaluated literally.
// The plain-double operations below throw RangeError when a result exceeds
// double range; constants_report() additionally carries the natural logs,
// which stay finite for every admissible input.

// 1 / (1 - 1/q - d/(2p)); requires d/(2p) + 1/q < 1.
double gamma0(double p, double q, int d);

// Sum_{i>=0} c^i / Gamma(1 + i/2); term recursion stops once the term falls
// below 1e-14 of the partial sum.  Equals exp(c^2)(1 + erf(c)).
double mittag_leffler_half(double c);
double ln_mittag_leffler_half(double c);
// log of the same sum with the argument given as ln(c); extended precision
// because the chained constants square arguments that are themselves
// exponentially large.
long double ln_mittag_leffler_half_from_ln(double ln_c);

double lambda1(double b_sup, double l0, double lambda_lower,
               double lambda_upper, int d, int m, double T);

// exp(b_sup T / (2 lambda_upper)) * mittag_leffler_half(c) with
// c = lambda1 * sqrt(pi T) * ((1 + 24 d) lambda_upper / lambda_lower)^d.
double lambda2(double lambda1_val, double T, int d, double lambda_lower,
               double lambda_upper, double b_sup);
double ln_lambda2(double lambda1_val, double T, int d, double lambda_lower,
                  double lambda_upper, double b_sup);

// kappa0 = 4 (1 + 24 d) lambda_upper;
// lambda3 = lambda2 * exp(b_sup^2 / (2 lambda_upper)) * (kappa0 / (2 lambda_lower))^{d/2}.
std::pair<double, double> kappa0_lambda3(int d, double lambda_upper,
                                         double lambda_lower, double b_sup,
                                         double lambda2_val);

double alpha0(double p, double q, int d, double lambda_lower,
              double lambda_upper, double kappa0_val, double lambda3_val,
              double gamma0_val);
LogScaled alpha0_log(double p, double q, int d, double lambda_lower,
                     double lambda_upper, double kappa0_val,
                     LogScaled lambda3_val, double gamma0_val);

// 2^{1 + T (2 lam alpha0 ||f||)^{gamma0}}.
double khasminskii_bound(double lam, double norm_fpq, double alpha0_val,
                         double gamma0_val, double T);
LogScaled khasminskii_bound_log(double lam, double norm_fpq,
                                LogScaled alpha0_val, double gamma0_val,
                                double T);

struct SolutionConstants {
  double beta_T = 0.0;
  double hat_beta_T = 0.0;  // may be inf; the ln fields stay finite
  double hat_alpha0 = 0.0;
  long double ln_hat_beta_T = 0.0L;
  long double ln_hat_alpha0 = 0.0L;
};
SolutionConstants solution_constants(double b_sup, double l0,
                                     double lambda_lower, double lambda_upper,
                                     int d, double T, double p);

// Optimal truncation radius (-8 q d^2 lambda_upper T (1 ^ alpha/2) log delta)^{1/2}.
double truncation_level(double q, int d, double lambda_upper, double T,
                        double alpha, double delta);

// sup_{x>=0} x^gamma e^{-beta x^2} = (gamma / (2 e beta))^{gamma/2}.
double sup_helper(double gamma, double beta_coef);

struct ConstantEntry {
  double value = 0.0;  // plain double evaluation; +inf past double range
  // natural log in extended precision: the report stays finite over the
  // whole working box of inputs even where the value is doubly exponential
  long double log_value = 0.0L;
  bool fits_double() const { return std::isfinite(value); }
};

struct ConstantsReport {
  ConstantEntry gamma0, kappa0, lambda1, lambda2, lambda3, alpha0, beta_T,
      hat_beta_T, hat_alpha0;
  AssumptionData inputs;
  int dim_d = 1;
  int noise_dim_m = 1;
};

ConstantsReport constants_report(const AssumptionData& a, int d, int m);

// Aligned key=value text; entries past double range print as exp(ln).
std::string format_report(const ConstantsReport& report);

// CSV record: name,value,log_value per row.
std::string report_csv(const ConstantsReport& report);

}  // namespace sem
