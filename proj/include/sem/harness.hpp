#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sem/constants.hpp"
#include "sem/engine.hpp"
#include "sem/models.hpp"

namespace sem {

enum class TruncationMode { kNone, kOptimal, kFixed };

struct StudyConfig {
  std::string model_label;
  std::vector<double> x0;
  double horizon_T = 1.0;
  std::vector<double> delta_ladder;  // strictly decreasing, each T / 2^j
  std::int64_t ref_refinement = 16;
  double beta = 1.0;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 0;
  TruncationMode truncation = TruncationMode::kNone;
  double fixed_k = 0.0;

  void validate() const;  // ladder shape, divisibility, beta range
};

struct RatePoint {
  double delta = 0.0;
  double error_mean = 0.0;
  double error_stderr = 0.0;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  double theoretical_rate = 0.0;  // (beta/2) min(1, alpha/2)
  double beta = 1.0;
  std::int64_t n_paths = 0;
  bool degenerate_exact = false;  // every mean identically zero
};

struct RateReport {
  double slope = 0.0;
  double theoretical_rate = 0.0;
  double margin = 0.05;
  bool pass = false;
  bool applicable = true;  // false for degenerate-exact fits
  // prefactor shape e^{(-(beta/2)(1 ^ alpha/2) log delta)^{d gamma0 / 2p}} + 1
  // evaluated with unit leading constant, and its product with delta^rate
  std::vector<double> deltas;
  std::vector<double> s4_prefactor;
  std::vector<double> s4_product;
  std::string summary;
};

// Weighted least squares of log(error_mean) on log(delta), weights
// 1/stderr^2; zero-mean ladders come back flagged degenerate_exact.
RateFit fit_rate(const std::vector<RatePoint>& points, double beta,
                 double theoretical_rate, std::int64_t n_paths);

// Runs the ladder against a shared reference grid delta_min / ref_refinement.
// Truncation kOptimal substitutes the drift b_k with the optimal radius
// k(delta) before simulating each ladder point; kFixed uses fixed_k
// everywhere.  The
// geometric-Brownian-motion oracle model is measured against its closed-form
// terminal value instead of the fine-grid proxy.
RateFit run_convergence(const StudyConfig& config);

RateReport rate_report(const RateFit& fit, const ConstantsReport& constants,
                       double margin = 0.05);

StudyConfig load_config(const std::string& path);
StudyConfig parse_config_text(const std::string& text,
                              const std::string& origin = "<memory>");

// key=value lines ('#' comments); duplicate keys rejected with line numbers.
std::vector<std::pair<std::string, std::string>> parse_kv_text(
    const std::string& text, const std::string& origin);
// Builds a StudyConfig from merged key/value pairs (later entries override
// earlier ones, which is how CLI overrides take precedence over the file).
StudyConfig build_study_config(
    const std::vector<std::pair<std::string, std::string>>& kv);

// CSV schema: header delta,error_mean,error_stderr,n_paths,beta,
// theoretical_rate; one row per ladder point; trailing comment
// "# slope=<v> r2=<v>".  Written atomically (temp file + rename).
std::string rate_csv(const RateFit& fit);
void write_csv(const RateFit& fit, const std::string& path);
RateFit read_rate_csv(const std::string& path);

void write_text_atomic(const std::string& path, const std::string& content);

// Shortest round-trip decimal representation (used everywhere CSV output
// must be bit-reproducible).
std::string format_double(double v);

}  // namespace sem
