#include "sem/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "sem/errors.hpp"

namespace sem {

namespace {

// delta must equal T / 2^j for some integer j >= 0 (up to 2 ulp).
bool is_dyadic_fraction(double T, double delta, int* out_j = nullptr) {
  if (!(delta > 0.0) || delta > T) return false;
  const double ratio = T / delta;
  const double j = std::round(std::log2(ratio));
  if (j < 0.0 || j > 62.0) return false;
  const double reconstructed = T / std::pow(2.0, j);
  if (std::fabs(reconstructed - delta) >
      2.0 * std::numeric_limits<double>::epsilon() * delta)
    return false;
  if (out_j) *out_j = static_cast<int>(j);
  return true;
}

}  // namespace

void StudyConfig::validate() const {
  if (model_label.empty())
    throw ConfigError("harness::StudyConfig: model label is required");
  if (!(horizon_T > 0.0))
    throw ConfigError("harness::StudyConfig: T must be > 0");
  if (!(beta > 0.0 && beta < 2.0))
    throw ConfigError("harness::StudyConfig: beta must lie in (0, 2)");
  if (delta_ladder.empty())
    throw ConfigError("harness::StudyConfig: delta ladder is empty");
  if (ref_refinement < 2)
    throw ConfigError("harness::StudyConfig: ref_refinement must be >= 2");
  if (n_paths < 2)
    throw ConfigError("harness::StudyConfig: n_paths must be >= 2");
  for (std::size_t i = 0; i < delta_ladder.size(); ++i) {
    if (!is_dyadic_fraction(horizon_T, delta_ladder[i]))
      throw ConfigError(
          "harness::StudyConfig: every ladder delta must equal T / 2^j so "
          "coarse grids divide the reference grid (offending delta #" +
          std::to_string(i) + ")");
    if (i > 0 && !(delta_ladder[i] < delta_ladder[i - 1]))
      throw ConfigError(
          "harness::StudyConfig: delta ladder must be strictly decreasing");
  }
  if (truncation == TruncationMode::kFixed && !(fixed_k > 0.0))
    throw ConfigError(
        "harness::StudyConfig: truncation_mode=fixed needs truncation_k > 0");
}

RateFit fit_rate(const std::vector<RatePoint>& points, double beta,
                 double theoretical_rate, std::int64_t n_paths) {
  RateFit fit;
  fit.points = points;
  fit.beta = beta;
  fit.theoretical_rate = theoretical_rate;
  fit.n_paths = n_paths;

  bool all_zero = true;
  for (const auto& p : points)
    if (p.error_mean != 0.0) all_zero = false;
  if (all_zero) {
    fit.degenerate_exact = true;
    return fit;
  }
  if (points.size() < 2)
    throw ConfigError("harness::fit_rate: need at least 2 ladder points");

  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (const auto& p : points) {
    if (!(p.error_mean > 0.0))
      throw NumericalError(
          "harness::fit_rate: nonpositive error mean in a nondegenerate fit");
    const double x = std::log(p.delta);
    const double y = std::log(p.error_mean);
    const double w =
        p.error_stderr > 0.0 ? 1.0 / (p.error_stderr * p.error_stderr) : 1.0;
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
  }
  const double det = sw * swxx - swx * swx;
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;
  fit.slope_stderr = std::sqrt(sw / det);

  double ss_res = 0.0, ss_tot = 0.0;
  const double y_mean = swy / sw;
  for (const auto& p : points) {
    const double x = std::log(p.delta);
    const double y = std::log(p.error_mean);
    const double w =
        p.error_stderr > 0.0 ? 1.0 / (p.error_stderr * p.error_stderr) : 1.0;
    const double fit_y = fit.intercept + fit.slope * x;
    ss_res += w * (y - fit_y) * (y - fit_y);
    ss_tot += w * (y - y_mean) * (y - y_mean);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

RateFit run_convergence(const StudyConfig& config) {
  config.validate();
  SdeModel model = builtin_model(config.model_label);
  if (!model.oracle_only && !model.assumptions.a1_integrable &&
      config.truncation == TruncationMode::kNone)
    throw ConfigError(
        "harness::run_convergence: model '" + config.model_label +
        "' violates the integrability half of (A1); run it in a truncation "
        "mode or pick an integrable model");
  if (!model.assumptions.in_k1(model.dim_d) && !model.oracle_only)
    throw ConfigError("harness::run_convergence: model '" +
                      config.model_label +
                      "' violates the Krylov-class condition d/p + 2/q < 2");
  if (model.oracle_only && config.truncation != TruncationMode::kNone)
    throw ConfigError(
        "harness::run_convergence: truncation modes do not apply to the "
        "closed-form oracle model");

  std::vector<double> x0 = config.x0;
  if (x0.empty()) x0.assign(static_cast<std::size_t>(model.dim_d), 0.0);
  if (static_cast<int>(x0.size()) != model.dim_d)
    throw ConfigError("harness::run_convergence: x0 has wrong dimension");

  const double delta_min = config.delta_ladder.back();
  const double delta_ref =
      delta_min / static_cast<double>(config.ref_refinement);
  const auto n_ref =
      static_cast<std::int64_t>(std::round(config.horizon_T / delta_ref));
  const GridSpec grid_ref = make_grid(config.horizon_T, n_ref);

  std::vector<RatePoint> points;
  points.reserve(config.delta_ladder.size());
  for (double delta : config.delta_ladder) {
    const auto factor = static_cast<std::int64_t>(std::round(delta / delta_ref));
    if (grid_ref.n_steps % factor != 0)
      throw ConfigError(
          "harness::run_convergence: ladder delta does not divide the "
          "reference grid");

    SdeModel run_model = model;
    if (config.truncation == TruncationMode::kOptimal) {
      const double k = truncation_level(
          model.assumptions.q, model.dim_d, model.assumptions.lambda_upper,
          config.horizon_T, model.assumptions.alpha, delta);
      run_model = truncate_drift(model, k);
    } else if (config.truncation == TruncationMode::kFixed) {
      run_model = truncate_drift(model, config.fixed_k);
    }

    ErrorEstimate est;
    if (model.oracle_only && model.gbm_sigma != 0.0) {
      est = gbm_terminal_error_mc(run_model, x0, grid_ref, factor,
                                  config.n_paths, config.seed);
    } else {
      est = strong_error_mc(run_model, x0, grid_ref, factor, config.beta,
                            config.n_paths, config.seed);
    }
    points.push_back(RatePoint{est.delta, est.mean, est.std_error});
  }

  const double theoretical =
      0.5 * config.beta * std::min(1.0, 0.5 * model.assumptions.alpha);
  return fit_rate(points, config.beta, theoretical, config.n_paths);
}

RateReport rate_report(const RateFit& fit, const ConstantsReport& constants,
                       double margin) {
  RateReport report;
  report.margin = margin;
  report.theoretical_rate = fit.theoretical_rate;
  if (fit.degenerate_exact) {
    report.applicable = false;
    report.pass = true;
    report.summary =
        "degenerate-exact: every ladder error is identically zero";
    return report;
  }
  report.slope = fit.slope;
  report.pass = fit.slope >= fit.theoretical_rate - margin;

  const double d_over_2p =
      constants.dim_d / (2.0 * constants.inputs.p);
  const double shape_exp = constants.gamma0.value * d_over_2p;
  for (const auto& p : fit.points) {
    const double rate_log = -fit.theoretical_rate * std::log(p.delta);
    const double prefactor = std::exp(std::pow(rate_log, shape_exp)) + 1.0;
    report.deltas.push_back(p.delta);
    report.s4_prefactor.push_back(prefactor);
    report.s4_product.push_back(prefactor *
                                std::pow(p.delta, fit.theoretical_rate));
  }

  std::ostringstream os;
  os.precision(4);
  os << "fitted slope " << fit.slope << " (stderr " << fit.slope_stderr
     << ", r^2 " << fit.r_squared << ") vs theoretical rate "
     << fit.theoretical_rate << ", margin " << margin << ": "
     << (report.pass ? "PASS" : "FAIL")
     << "; prefactor shape evaluated with unit leading constant";
  report.summary = os.str();
  return report;
}

namespace {

std::vector<double> parse_double_list(const std::string& value,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ConfigError("harness::load_config: bad number '" + item +
                        "' for key " + key);
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_kv_text(
    const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::map<std::string, bool> seen;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("harness::load_config: " + origin + " line " +
                        std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    strip(key);
    strip(value);
    if (seen[key])
      throw ConfigError("harness::load_config: " + origin + " line " +
                        std::to_string(line_no) + ": duplicate key " + key);
    seen[key] = true;
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

StudyConfig build_study_config(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  StudyConfig config;
  std::map<std::string, std::string> merged;
  for (const auto& [key, value] : kv) merged[key] = value;  // later wins

  for (const auto& [key, value] : merged) {
    try {
      if (key == "model") {
        config.model_label = value;
      } else if (key == "x0") {
        config.x0 = parse_double_list(value, key);
      } else if (key == "T") {
        config.horizon_T = std::stod(value);
      } else if (key == "deltas") {
        config.delta_ladder = parse_double_list(value, key);
      } else if (key == "ref_refinement") {
        config.ref_refinement = std::stoll(value);
      } else if (key == "beta") {
        config.beta = std::stod(value);
      } else if (key == "n_paths") {
        config.n_paths = std::stoll(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "truncation_mode") {
        if (value == "none")
          config.truncation = TruncationMode::kNone;
        else if (value == "optimal")
          config.truncation = TruncationMode::kOptimal;
        else if (value == "fixed")
          config.truncation = TruncationMode::kFixed;
        else
          throw ConfigError(
              "harness::load_config: truncation_mode must be "
              "none|optimal|fixed");
      } else if (key == "truncation_k") {
        config.fixed_k = std::stod(value);
      } else {
        throw ConfigError("harness::load_config: unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw ConfigError("harness::load_config: bad value for key " + key);
    }
  }
  if (config.delta_ladder.empty()) {
    // documented default ladder T/2^4 .. T/2^8
    for (int j = 4; j <= 8; ++j)
      config.delta_ladder.push_back(config.horizon_T / std::pow(2.0, j));
  }
  config.validate();
  return config;
}

StudyConfig parse_config_text(const std::string& text,
                              const std::string& origin) {
  return build_study_config(parse_kv_text(text, origin));
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("harness::load_config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::string rate_csv(const RateFit& fit) {
  std::ostringstream os;
  os << "delta,error_mean,error_stderr,n_paths,beta,theoretical_rate\n";
  for (const auto& p : fit.points)
    os << format_double(p.delta) << ',' << format_double(p.error_mean) << ','
       << format_double(p.error_stderr) << ',' << fit.n_paths << ','
       << format_double(fit.beta) << ',' << format_double(fit.theoretical_rate)
       << '\n';
  os << "# slope=" << format_double(fit.slope)
     << " r2=" << format_double(fit.r_squared) << '\n';
  return os.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw ConfigError("harness::write_csv: cannot open '" + tmp + "'");
    out << content;
    if (!out)
      throw ConfigError("harness::write_csv: write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw ConfigError("harness::write_csv: rename to '" + path +
                      "' failed: " + ec.message());
}

void write_csv(const RateFit& fit, const std::string& path) {
  write_text_atomic(path, rate_csv(fit));
}

RateFit read_rate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("harness::read_rate_csv: cannot open '" + path + "'");
  RateFit fit;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("delta,", 0) != 0)
        throw ConfigError("harness::read_rate_csv: missing header");
      continue;
    }
    if (line[0] == '#') {
      std::istringstream ss(line);
      std::string hash, slope_kv, r2_kv;
      ss >> hash >> slope_kv >> r2_kv;
      if (slope_kv.rfind("slope=", 0) == 0)
        fit.slope = std::stod(slope_kv.substr(6));
      if (r2_kv.rfind("r2=", 0) == 0) fit.r_squared = std::stod(r2_kv.substr(3));
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw ConfigError("harness::read_rate_csv: line " +
                        std::to_string(line_no) + ": expected 6 columns");
    RatePoint p;
    p.delta = std::stod(fields[0]);
    p.error_mean = std::stod(fields[1]);
    p.error_stderr = std::stod(fields[2]);
    fit.n_paths = std::stoll(fields[3]);
    fit.beta = std::stod(fields[4]);
    fit.theoretical_rate = std::stod(fields[5]);
    fit.points.push_back(p);
  }
  return fit;
}

}  // namespace sem
