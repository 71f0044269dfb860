#include "sem/constants.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sem/errors.hpp"

namespace sem {

double gamma0(double p, double q, int d) {
  const double denom = 1.0 - 1.0 / q - d / (2.0 * p);
  if (!(denom > 0.0))
    throw ConfigError(
        "constants::gamma0: (p, q) outside the Krylov class, need "
        "d/(2p) + 1/q < 1");
  return 1.0 / denom;
}

double mittag_leffler_half(double c) {
  if (c < 0.0)
    throw ConfigError("constants::mittag_leffler_half: c must be >= 0");
  if (c == 0.0) return 1.0;
  // Past exp(c^2) ~ DBL_MAX the sum is not representable.
  if (c > 26.7) return std::numeric_limits<double>::infinity();
  // Split into even terms c^{2j}/j! and odd terms c^{2j+1}/Gamma(j + 3/2).
  double even = 1.0;                       // j = 0
  double odd = 2.0 * c / std::sqrt(M_PI);  // c / Gamma(3/2)
  double sum = even + odd;
  const double c_sq = c * c;
  for (int j = 0; j < 100000; ++j) {
    even *= c_sq / (j + 1.0);
    odd *= c_sq / (j + 1.5);
    sum += even + odd;
    if (even + odd < 1e-14 * sum) break;
  }
  return sum;
}

double ln_mittag_leffler_half(double c) {
  if (c < 0.0)
    throw ConfigError("constants::ln_mittag_leffler_half: c must be >= 0");
  if (c <= 26.0) return std::log(mittag_leffler_half(c));
  // exp(c^2)(1 + erf(c)) with erf(c) == 1 to double precision for c > 6
  return c * c + M_LN2;
}

long double ln_mittag_leffler_half_from_ln(double ln_c) {
  if (ln_c <= std::log(26.0))
    return std::log(mittag_leffler_half(std::exp(ln_c)));
  return std::exp(2.0L * static_cast<long double>(ln_c)) +
         static_cast<long double>(M_LN2);
}

double lambda1(double b_sup, double l0, double lambda_lower,
               double lambda_upper, int d, int m, double T) {
  if (!(lambda_lower > 0.0) || !(lambda_upper >= lambda_lower))
    throw ConfigError("constants::lambda1: invalid ellipticity window");
  const double ratio = lambda_upper / lambda_lower;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double factorial_d = std::tgamma(d + 1.0);
  if (!std::isfinite(factorial_d))
    throw RangeError("constants::lambda1: d! exceeds double range");

  const double brace1 = b_sup / std::sqrt(lambda_lower) +
                        2.0 * sqrt_d * l0 * ratio * ratio +
                        std::pow(d, 0.5 * d + 1.0) * factorial_d *
                            std::pow(ratio, d) * l0;
  const double branch1 =
      2.0 * brace1 * std::exp(b_sup * b_sup * T / lambda_upper);

  const double brace2 =
      2.0 * std::sqrt(lambda_upper) * b_sup +
      (b_sup * b_sup + 2.0 * lambda_upper * l0 * sqrt_d) * (sqrt_d + 2.0) +
      std::pow(2.0, m + 11) / lambda_lower * (l0 + 2.0 * b_sup) *
          ((std::pow(b_sup, 3) + std::pow(d * lambda_upper, 1.5)) +
           std::sqrt(lambda_lower) * (b_sup * b_sup + d * lambda_upper));
  const double branch2 = brace2 * std::pow(2.0, 0.5 * (d + 1)) / lambda_lower *
                         std::exp((b_sup + b_sup * b_sup) * T / lambda_upper);

  const double result = std::max(branch1, branch2);
  if (!std::isfinite(result))
    throw RangeError("constants::lambda1: result exceeds double range");
  return result;
}

namespace {
double lambda2_series_arg(double lambda1_val, double T, int d,
                          double lambda_lower, double lambda_upper) {
  return lambda1_val * std::sqrt(M_PI * T) *
         std::pow((1.0 + 24.0 * d) * lambda_upper / lambda_lower, d);
}
}  // namespace

double lambda2(double lambda1_val, double T, int d, double lambda_lower,
               double lambda_upper, double b_sup) {
  const double c = lambda2_series_arg(lambda1_val, T, d, lambda_lower, lambda_upper);
  const double result =
      std::exp(b_sup * T / (2.0 * lambda_upper)) * mittag_leffler_half(c);
  if (!std::isfinite(result))
    throw RangeError("constants::lambda2: result exceeds double range");
  return result;
}

double ln_lambda2(double lambda1_val, double T, int d, double lambda_lower,
                  double lambda_upper, double b_sup) {
  const double c = lambda2_series_arg(lambda1_val, T, d, lambda_lower, lambda_upper);
  return b_sup * T / (2.0 * lambda_upper) + ln_mittag_leffler_half(c);
}

std::pair<double, double> kappa0_lambda3(int d, double lambda_upper,
                                         double lambda_lower, double b_sup,
                                         double lambda2_val) {
  const double kappa0 = 4.0 * (1.0 + 24.0 * d) * lambda_upper;
  const double lambda3 = lambda2_val *
                         std::exp(b_sup * b_sup / (2.0 * lambda_upper)) *
                         std::pow(kappa0 / (2.0 * lambda_lower), 0.5 * d);
  return {kappa0, lambda3};
}

namespace {
// alpha0 = pref * { lambda_upper^{e} + lambda3 (gamma0 (1-1/q))^{(q-1)/q} (kappa0/2)^{e} }
// with e = (d/2)(1 - 1/p) and pref = (1-1/p)^{e} / (lambda_lower (2 pi)^{1/p})^{d/2}.
struct Alpha0Parts {
  double ln_pref;
  double first_term;       // lambda_upper^{e}
  double cross_factor;     // (gamma0 (1-1/q))^{(q-1)/q} (kappa0/2)^{e}
};

Alpha0Parts alpha0_parts(double p, double q, int d, double lambda_lower,
                         double lambda_upper, double kappa0_val,
                         double gamma0_val) {
  if (!(p > 1.0) || !(q > 1.0) || !(1.0 - 1.0 / q - d / (2.0 * p) > 0.0))
    throw ConfigError("constants::alpha0: (p, q) outside the Krylov class");
  const double e = 0.5 * d * (1.0 - 1.0 / p);
  Alpha0Parts parts;
  parts.ln_pref = e * std::log(1.0 - 1.0 / p) -
                  0.5 * d * std::log(lambda_lower * std::pow(2.0 * M_PI, 1.0 / p));
  parts.first_term = std::pow(lambda_upper, e);
  parts.cross_factor = std::pow(gamma0_val * (1.0 - 1.0 / q), (q - 1.0) / q) *
                       std::pow(0.5 * kappa0_val, e);
  return parts;
}
}  // namespace

double alpha0(double p, double q, int d, double lambda_lower,
              double lambda_upper, double kappa0_val, double lambda3_val,
              double gamma0_val) {
  const auto parts = alpha0_parts(p, q, d, lambda_lower, lambda_upper,
                                  kappa0_val, gamma0_val);
  return std::exp(parts.ln_pref) *
         (parts.first_term + lambda3_val * parts.cross_factor);
}

LogScaled alpha0_log(double p, double q, int d, double lambda_lower,
                     double lambda_upper, double kappa0_val,
                     LogScaled lambda3_val, double gamma0_val) {
  const auto parts = alpha0_parts(p, q, d, lambda_lower, lambda_upper,
                                  kappa0_val, gamma0_val);
  const LogScaled brace = LogScaled::from_value(parts.first_term) +
                          lambda3_val * LogScaled::from_value(parts.cross_factor);
  return LogScaled::from_ln(parts.ln_pref) * brace;
}

double khasminskii_bound(double lam, double norm_fpq, double alpha0_val,
                         double gamma0_val, double T) {
  if (!(lam > 0.0))
    throw ConfigError("constants::khasminskii_bound: lambda must be > 0");
  const double inner = 2.0 * lam * alpha0_val * norm_fpq;
  return std::exp2(1.0 + T * std::pow(inner, gamma0_val));
}

LogScaled khasminskii_bound_log(double lam, double norm_fpq,
                                LogScaled alpha0_val, double gamma0_val,
                                double T) {
  if (!(lam > 0.0))
    throw ConfigError("constants::khasminskii_bound: lambda must be > 0");
  const LogScaled inner = LogScaled::from_value(2.0 * lam * norm_fpq) * alpha0_val;
  const double powered = inner.pow(gamma0_val).value();  // inf collapses the log
  return LogScaled::from_ln(M_LN2 * (1.0 + T * powered));
}

SolutionConstants solution_constants(double b_sup, double l0,
                                     double lambda_lower, double lambda_upper,
                                     int d, double T, double p) {
  SolutionConstants out;
  const double ratio = lambda_upper / lambda_lower;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double brace = b_sup / std::sqrt(lambda_upper) +
                       l0 * (d + 2.0 * sqrt_d);
  out.beta_T = std::pow(2.0, 3 * d + 1) * std::pow(ratio, d + 1) *
               std::sqrt(M_PI * T) * brace *
               std::exp(b_sup * b_sup * T / (4.0 * lambda_upper));
  if (!std::isfinite(out.beta_T))
    throw RangeError("constants::solution_constants: beta_T exceeds double range");

  const double exp_arg = b_sup * b_sup * T / (2.0 * lambda_upper);
  out.ln_hat_beta_T =
      static_cast<long double>(exp_arg) +
      (out.beta_T > 0.0
           ? ln_mittag_leffler_half_from_ln(std::log(out.beta_T))
           : 0.0L);
  out.hat_beta_T = std::exp(exp_arg) * mittag_leffler_half(out.beta_T);

  const double e = 0.5 * d * (1.0 - 1.0 / p);
  const double ln_factor = -d / (2.0 * p) * std::log(2.0 * M_PI) +
                           e * std::log(8.0 * (p - 1.0) / p) +
                           0.5 * d *
                               std::log(std::pow(lambda_upper, 1.0 - 1.0 / p) /
                                        lambda_lower);
  out.ln_hat_alpha0 = out.ln_hat_beta_T + static_cast<long double>(ln_factor);
  out.hat_alpha0 = out.hat_beta_T * std::exp(ln_factor);
  return out;
}

double truncation_level(double q, int d, double lambda_upper, double T,
                        double alpha, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError(
        "constants::truncation_level: delta must lie in (0, 1)");
  const double rate = std::min(1.0, 0.5 * alpha);
  return std::sqrt(-8.0 * q * d * d * lambda_upper * T * rate *
                   std::log(delta));
}

double sup_helper(double gamma, double beta_coef) {
  if (!(gamma > 0.0) || !(beta_coef > 0.0))
    throw ConfigError("constants::sup_helper: both arguments must be > 0");
  return std::pow(gamma / (2.0 * M_E * beta_coef), 0.5 * gamma);
}

namespace {

// Natural logs of the two branches of the first kernel constant; the braced
// polynomial parts stay far inside double range, only the exponential
// prefactors blow up.
std::pair<double, double> lambda1_branch_lns(double b_sup, double l0,
                                             double lambda_lower,
                                             double lambda_upper, int d, int m,
                                             double T) {
  const double ratio = lambda_upper / lambda_lower;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double brace1 = b_sup / std::sqrt(lambda_lower) +
                        2.0 * sqrt_d * l0 * ratio * ratio +
                        std::pow(d, 0.5 * d + 1.0) * std::tgamma(d + 1.0) *
                            std::pow(ratio, d) * l0;
  const double brace2 =
      2.0 * std::sqrt(lambda_upper) * b_sup +
      (b_sup * b_sup + 2.0 * lambda_upper * l0 * sqrt_d) * (sqrt_d + 2.0) +
      std::pow(2.0, m + 11) / lambda_lower * (l0 + 2.0 * b_sup) *
          ((std::pow(b_sup, 3) + std::pow(d * lambda_upper, 1.5)) +
           std::sqrt(lambda_lower) * (b_sup * b_sup + d * lambda_upper));
  const double neg_inf = -std::numeric_limits<double>::infinity();
  const double ln1 = brace1 > 0.0 ? M_LN2 + std::log(brace1) +
                                        b_sup * b_sup * T / lambda_upper
                                  : neg_inf;
  const double ln2 = brace2 > 0.0
                         ? std::log(brace2) + 0.5 * (d + 1) * M_LN2 -
                               std::log(lambda_lower) +
                               (b_sup + b_sup * b_sup) * T / lambda_upper
                         : neg_inf;
  return {ln1, ln2};
}

}  // namespace

ConstantsReport constants_report(const AssumptionData& a, int d, int m) {
  a.validate();
  ConstantsReport rep;
  rep.inputs = a;
  rep.dim_d = d;
  rep.noise_dim_m = m;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  const double g0 = gamma0(a.p, a.q, d);
  rep.gamma0 = {g0, std::log(g0)};

  const auto [ln_b1, ln_b2] = lambda1_branch_lns(
      a.b_sup, a.l0, a.lambda_lower, a.lambda_upper, d, m, a.horizon_T);
  const double ln_l1 = std::max(ln_b1, ln_b2);
  rep.lambda1 = {std::exp(ln_l1), ln_l1};
  if (rep.lambda1.fits_double() && ln_l1 > neg_inf) {
    // exact double evaluation where representable
    rep.lambda1.value = lambda1(a.b_sup, a.l0, a.lambda_lower, a.lambda_upper,
                                d, m, a.horizon_T);
    rep.lambda1.log_value = std::log(rep.lambda1.value);
  }

  // ln of the series argument c = lambda1 sqrt(pi T) ((1+24d) ratio)^d
  const double ln_c =
      ln_l1 + 0.5 * std::log(M_PI * a.horizon_T) +
      d * std::log((1.0 + 24.0 * d) * a.lambda_upper / a.lambda_lower);
  const long double ln_l2 =
      static_cast<long double>(a.b_sup * a.horizon_T / (2.0 * a.lambda_upper)) +
      (ln_c > neg_inf ? ln_mittag_leffler_half_from_ln(ln_c) : 0.0L);
  rep.lambda2 = {static_cast<double>(std::exp(ln_l2)), ln_l2};

  const double k0 = 4.0 * (1.0 + 24.0 * d) * a.lambda_upper;
  rep.kappa0 = {k0, std::log(k0)};

  const long double ln_l3 =
      ln_l2 +
      static_cast<long double>(a.b_sup * a.b_sup / (2.0 * a.lambda_upper) +
                               0.5 * d * std::log(k0 / (2.0 * a.lambda_lower)));
  rep.lambda3 = {static_cast<double>(std::exp(ln_l3)), ln_l3};

  // alpha0 = pref { lambda_upper^e + lambda3 cross }, log-sum-exp in the brace
  {
    const double e = 0.5 * d * (1.0 - 1.0 / a.p);
    const double ln_pref =
        e * std::log(1.0 - 1.0 / a.p) -
        0.5 * d * std::log(a.lambda_lower * std::pow(2.0 * M_PI, 1.0 / a.p));
    const long double ln_first =
        static_cast<long double>(e * std::log(a.lambda_upper));
    const long double ln_second =
        ln_l3 + static_cast<long double>(
                    (a.q - 1.0) / a.q * std::log(g0 * (1.0 - 1.0 / a.q)) +
                    e * std::log(0.5 * k0));
    const long double hi = std::max(ln_first, ln_second);
    const long double lo = std::min(ln_first, ln_second);
    const long double ln_a0 =
        static_cast<long double>(ln_pref) + hi + std::log1p(std::exp(lo - hi));
    rep.alpha0 = {static_cast<double>(std::exp(ln_a0)), ln_a0};
  }

  const SolutionConstants sol = solution_constants(
      a.b_sup, a.l0, a.lambda_lower, a.lambda_upper, d, a.horizon_T, a.p);
  rep.beta_T = {sol.beta_T,
                sol.beta_T > 0.0
                    ? static_cast<long double>(std::log(sol.beta_T))
                    : static_cast<long double>(neg_inf)};
  rep.hat_beta_T = {sol.hat_beta_T, sol.ln_hat_beta_T};
  rep.hat_alpha0 = {sol.hat_alpha0, sol.ln_hat_alpha0};
  return rep;
}

namespace {
void append_entry(std::ostringstream& os, const char* name,
                  const ConstantEntry& e) {
  os << name;
  for (std::size_t i = std::string(name).size(); i < 12; ++i) os << ' ';
  os.precision(12);
  if (e.fits_double())
    os << "= " << e.value << "\n";
  else
    os << "= exp(" << e.log_value << ")  [exceeds double range]\n";
}
}  // namespace

std::string format_report(const ConstantsReport& report) {
  std::ostringstream os;
  append_entry(os, "gamma0", report.gamma0);
  append_entry(os, "kappa0", report.kappa0);
  append_entry(os, "lambda1", report.lambda1);
  append_entry(os, "lambda2", report.lambda2);
  append_entry(os, "lambda3", report.lambda3);
  append_entry(os, "alpha0", report.alpha0);
  append_entry(os, "beta_T", report.beta_T);
  append_entry(os, "hat_beta_T", report.hat_beta_T);
  append_entry(os, "hat_alpha0", report.hat_alpha0);
  return os.str();
}

std::string report_csv(const ConstantsReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "name,value,log_value\n";
  const std::pair<const char*, const ConstantEntry*> rows[] = {
      {"gamma0", &report.gamma0},     {"kappa0", &report.kappa0},
      {"lambda1", &report.lambda1},   {"lambda2", &report.lambda2},
      {"lambda3", &report.lambda3},   {"alpha0", &report.alpha0},
      {"beta_T", &report.beta_T},     {"hat_beta_T", &report.hat_beta_T},
      {"hat_alpha0", &report.hat_alpha0}};
  for (const auto& [name, entry] : rows)
    os << name << ',' << entry->value << ',' << entry->log_value << '\n';
  return os.str();
}

}  // namespace sem
