#include "sem/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sem/constants.hpp"
#include "sem/engine.hpp"
#include "sem/errors.hpp"
#include "sem/estimates.hpp"
#include "sem/harness.hpp"
#include "sem/parallel.hpp"
#include "sem/regularity.hpp"

namespace sem {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

std::uint64_t env_seed_or(std::uint64_t fallback) {
  if (const char* env = std::getenv("SINGULAR_EM_SEED"))
    return std::strtoull(env, nullptr, 10);
  return fallback;
}

std::vector<double> split_doubles(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ConfigError(std::string("cli: bad number '") + item + "' in " +
                        what);
    }
  }
  if (out.empty())
    throw ConfigError(std::string("cli: empty list for ") + what);
  return out;
}

struct ConvergeArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string model;
  std::int64_t paths = -1;
  std::int64_t seed = -1;
  double margin = 0.05;
};

int run_converge(const ConvergeArgs& args) {
  std::vector<std::pair<std::string, std::string>> kv;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in)
      throw ConfigError("cli: cannot open config '" + args.config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    kv = parse_kv_text(buf.str(), args.config_path);
  }
  bool seed_given = args.seed >= 0;
  for (const auto& [k, v] : kv)
    if (k == "seed") seed_given = true;
  if (!seed_given)
    kv.emplace_back("seed", std::to_string(env_seed_or(0)));
  // flag and key=value overrides take precedence over the file
  if (!args.model.empty()) kv.emplace_back("model", args.model);
  if (args.paths >= 0) kv.emplace_back("n_paths", std::to_string(args.paths));
  if (args.seed >= 0) kv.emplace_back("seed", std::to_string(args.seed));
  for (const auto& ov : args.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("cli: override '" + ov + "' is not key=value");
    kv.emplace_back(ov.substr(0, eq), ov.substr(eq + 1));
  }

  const StudyConfig config = build_study_config(kv);
  const RateFit fit = run_convergence(config);
  const SdeModel model = builtin_model(config.model_label);
  ConstantsReport constants{};
  if (!model.oracle_only)
    constants =
        constants_report(model.assumptions, model.dim_d, model.noise_dim_m);
  const RateReport report = rate_report(fit, constants, args.margin);

  std::cout << "model=" << config.model_label << " beta=" << config.beta
            << " n_paths=" << config.n_paths << " seed=" << config.seed
            << "\n";
  for (const auto& p : fit.points)
    std::cout << "  delta=" << format_double(p.delta)
              << " error_mean=" << format_double(p.error_mean)
              << " stderr=" << format_double(p.error_stderr) << "\n";
  std::cout << report.summary << "\n";
  if (!args.out_path.empty()) write_csv(fit, args.out_path);
  return report.pass ? kExitOk : kExitCheckFailed;
}

int run_constants(const std::string& model_label, const std::string& out_path) {
  const SdeModel model = builtin_model(model_label);
  if (model.oracle_only)
    throw ConfigError(
        "cli constants: the oracle-only model has unbounded coefficients; "
        "the report is undefined for it");
  const ConstantsReport report =
      constants_report(model.assumptions, model.dim_d, model.noise_dim_m);
  std::cout << "model=" << model_label << "\n" << format_report(report);
  if (!out_path.empty()) write_text_atomic(out_path, report_csv(report));
  return kExitOk;
}

int run_simulate(const std::string& model_label, const std::string& x0_csv,
                 double T, std::int64_t steps, std::int64_t paths,
                 std::int64_t seed_flag, const std::string& out_path) {
  const SdeModel model = builtin_model(model_label);
  std::vector<double> x0 =
      x0_csv.empty() ? std::vector<double>(model.dim_d, 0.0)
                     : split_doubles(x0_csv, "--x0");
  if (static_cast<int>(x0.size()) != model.dim_d)
    throw ConfigError("cli simulate: x0 has wrong dimension");
  const GridSpec grid = make_grid(T, steps);
  const std::uint64_t seed =
      seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : env_seed_or(0);

  std::ostringstream csv;
  if (paths == 1) {
    const BrownianTable table = generate_table(seed, 0, grid, model.noise_dim_m);
    const Trajectory traj = simulate(model, x0, table);
    csv << "t";
    for (int i = 0; i < model.dim_d; ++i) csv << ",x" << i;
    csv << "\n";
    for (std::int64_t k = 0; k <= grid.n_steps; ++k) {
      csv << format_double(static_cast<double>(k) * grid.dt);
      for (int i = 0; i < model.dim_d; ++i)
        csv << ',' << format_double(traj.state(k)[i]);
      csv << "\n";
    }
    std::cout << "simulated 1 path, " << steps << " steps\n";
  } else {
    std::vector<double> terminal(static_cast<std::size_t>(paths) *
                                 model.dim_d);
    parallel_for(paths, [&](std::int64_t path) {
      const BrownianTable table =
          generate_table(seed, path, grid, model.noise_dim_m);
      const Trajectory traj = simulate(model, x0, table);
      for (int i = 0; i < model.dim_d; ++i)
        terminal[static_cast<std::size_t>(path) * model.dim_d + i] =
            traj.state(grid.n_steps)[i];
    });
    csv << "path";
    for (int i = 0; i < model.dim_d; ++i) csv << ",x" << i;
    csv << "\n";
    for (std::int64_t p = 0; p < paths; ++p) {
      csv << p;
      for (int i = 0; i < model.dim_d; ++i)
        csv << ','
            << format_double(
                   terminal[static_cast<std::size_t>(p) * model.dim_d + i]);
      csv << "\n";
    }
    for (int i = 0; i < model.dim_d; ++i) {
      std::vector<double> coord(static_cast<std::size_t>(paths));
      for (std::int64_t p = 0; p < paths; ++p)
        coord[static_cast<std::size_t>(p)] =
            terminal[static_cast<std::size_t>(p) * model.dim_d + i];
      const auto [mean, se] = mean_and_stderr(coord);
      std::cout << "terminal x" << i << ": mean=" << mean << " stderr=" << se
                << "\n";
    }
  }
  if (!out_path.empty()) write_text_atomic(out_path, csv.str());
  return kExitOk;
}

int run_krylov(const std::string& model_label, const std::string& x0_csv,
               double T, std::int64_t steps, std::int64_t paths,
               std::int64_t seed_flag, const std::string& lambda_csv,
               const std::string& field_csv, bool exact_proxy,
               const std::string& out_path) {
  const SdeModel model = builtin_model(model_label);
  std::vector<double> x0 =
      x0_csv.empty() ? std::vector<double>(model.dim_d, 0.0)
                     : split_doubles(x0_csv, "--x0");
  const GridSpec grid = make_grid(T, steps);
  const std::uint64_t seed =
      seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : env_seed_or(0);
  const std::vector<double> field_ab = split_doubles(field_csv, "--field");
  if (field_ab.size() != 2)
    throw ConfigError("cli krylov: --field wants 'a,b'");
  const ScalarField field =
      indicator_field(field_ab[0], field_ab[1], T, model.assumptions.p,
                      model.assumptions.q);

  std::vector<KrylovReport> reports;
  reports.push_back(
      krylov_functional_mc(model, field, x0, grid, paths, seed));
  bool all_passed =
      reports.back().functional_mean + reports.back().functional_ci95 <=
      reports.back().onestep_bound;
  for (double lam : split_doubles(lambda_csv, "--lambda")) {
    reports.push_back(khasminskii_mc(model, field, lam, x0, grid, paths, seed,
                                     exact_proxy));
    all_passed = all_passed && reports.back().passed;
  }
  for (const auto& r : reports) {
    if (r.lam == 0.0)
      std::cout << "functional: mean=" << r.functional_mean
                << " ci95=" << r.functional_ci95
                << " onestep_bound=" << r.onestep_bound << "\n";
    else
      std::cout << "lambda=" << r.lam << ": exp_mean=" << r.exp_mean
                << " ci95=" << r.exp_ci95
                << " bound=" << r.theoretical_exp_bound
                << (r.passed ? " PASS" : " FAIL") << "\n";
  }
  if (!out_path.empty()) write_text_atomic(out_path, krylov_csv(reports));
  return all_passed ? kExitOk : kExitCheckFailed;
}

int run_density(const std::string& model_label, const std::string& x0_csv,
                double T, std::int64_t steps, std::int64_t anchor_j, double t,
                std::int64_t paths, int bins, std::int64_t seed_flag,
                const std::string& out_path) {
  const SdeModel model = builtin_model(model_label);
  std::vector<double> x0 =
      x0_csv.empty() ? std::vector<double>(model.dim_d, 0.0)
                     : split_doubles(x0_csv, "--x0");
  const GridSpec grid = make_grid(T, steps);
  const std::uint64_t seed =
      seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : env_seed_or(0);
  const DensityCheck check =
      density_check(model, x0, grid, anchor_j, t, paths, bins, seed);
  std::cout << "t=" << t << " anchor_j=" << anchor_j
            << " bins=" << check.bins.size()
            << " violations=" << check.violations
            << (check.degenerate ? " (degenerate)" : "") << "\n";
  if (!out_path.empty()) write_text_atomic(out_path, density_csv(check));
  return check.violations == 0 ? kExitOk : kExitCheckFailed;
}

int run_regularity(const std::string& model_label, const std::string& s_csv,
                   const std::string& offsets_csv,
                   const std::string& direction_csv, bool gagliardo,
                   const std::string& theta_csv, double box_lo, double box_hi,
                   std::int64_t grid_n, double p_exp,
                   const std::string& out_path) {
  const SdeModel model = builtin_model(model_label);
  const std::vector<double> s_list = split_doubles(s_csv, "--s-list");
  const std::vector<double> offsets = split_doubles(offsets_csv, "--offsets");
  std::vector<double> direction = split_doubles(direction_csv, "--direction");
  if (static_cast<int>(direction.size()) != model.dim_d)
    throw ConfigError("cli regularity: --direction has wrong dimension");

  std::ostringstream csv;
  csv << "s,offset,modulus\n";
  for (double s : s_list)
    for (double off : offsets) {
      std::vector<double> y(model.dim_d, 0.0), z(model.dim_d, 0.0);
      double norm = 0.0;
      for (double c : direction) norm += c * c;
      norm = std::sqrt(norm);
      for (int i = 0; i < model.dim_d; ++i)
        z[static_cast<std::size_t>(i)] =
            off * direction[static_cast<std::size_t>(i)] / norm;
      const ModulusSample sample = a2_modulus(model, s, y, z);
      csv << format_double(s) << ',' << format_double(off) << ','
          << format_double(sample.value) << "\n";
    }

  const AlphaFit fit = fit_alpha(model, s_list, offsets, direction);
  if (fit.degenerate)
    std::cout << "alpha fit: degenerate (all moduli vanish)\n";
  else
    std::cout << "alpha_hat=" << fit.alpha_hat << " r2=" << fit.r_squared
              << "\n";

  if (gagliardo) {
    for (double theta : split_doubles(theta_csv, "--theta-list")) {
      const double v =
          gagliardo_seminorm(model, p_exp, theta, box_lo, box_hi, grid_n);
      std::cout << "gagliardo theta=" << theta << " seminorm=" << v << "\n";
      csv << "# gagliardo theta=" << format_double(theta) << " value="
          << format_double(v) << "\n";
    }
  }
  if (!out_path.empty()) write_text_atomic(out_path, csv.str());
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "Monte Carlo toolkit for Euler-Maruyama approximation of SDEs with "
      "bounded, possibly discontinuous drifts: strong-convergence studies, "
      "explicit-constant reports, occupation and heat-kernel checks, and "
      "drift-regularity classification.\n"
      "Settings precedence: command-line overrides > config file > defaults. "
      "Seed fallback: SINGULAR_EM_SEED environment variable."};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "cap worker threads (default: available cores); results do "
                 "not depend on this");

  ConvergeArgs conv;
  auto* converge = app.add_subcommand(
      "converge", "run a step-size ladder and fit the strong-convergence rate");
  converge->add_option("--config", conv.config_path, "key=value config file");
  converge->add_option("--out", conv.out_path, "rate CSV output path");
  converge->add_option("--model", conv.model, "model label override");
  converge->add_option("--paths", conv.paths, "n_paths override");
  converge->add_option("--seed", conv.seed, "seed override");
  converge->add_option("--margin", conv.margin, "slope pass margin");
  converge->add_option("overrides", conv.overrides,
                       "key=value overrides (same keys as the config file)");

  std::string const_model, const_out;
  auto* constants_cmd =
      app.add_subcommand("constants", "print the explicit-constants report");
  constants_cmd->add_option("--model", const_model, "model label")->required();
  constants_cmd->add_option("--out", const_out, "CSV output path");

  std::string sim_model, sim_x0, sim_out;
  double sim_T = 1.0;
  std::int64_t sim_steps = 256, sim_paths = 1, sim_seed = -1;
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate chain paths");
  simulate_cmd->add_option("--model", sim_model, "model label")->required();
  simulate_cmd->add_option("--x0", sim_x0, "initial point (comma list)");
  simulate_cmd->add_option("--T", sim_T, "time horizon");
  simulate_cmd->add_option("--steps", sim_steps, "number of grid steps");
  simulate_cmd->add_option("--paths", sim_paths, "number of paths");
  simulate_cmd->add_option("--seed", sim_seed, "stream seed");
  simulate_cmd->add_option("--out", sim_out, "CSV output path");

  std::string kry_model, kry_x0, kry_out, kry_lambda = "0.5,1,2",
                                          kry_field = "0,1";
  double kry_T = 1.0;
  std::int64_t kry_steps = 64, kry_paths = 10000, kry_seed = -1;
  bool kry_proxy = false;
  auto* krylov_cmd = app.add_subcommand(
      "krylov", "occupation-functional and exponential-moment checks");
  krylov_cmd->add_option("--model", kry_model, "model label")->required();
  krylov_cmd->add_option("--x0", kry_x0, "initial point");
  krylov_cmd->add_option("--T", kry_T, "time horizon");
  krylov_cmd->add_option("--steps", kry_steps, "chain steps (delta = T/steps)");
  krylov_cmd->add_option("--paths", kry_paths, "number of paths");
  krylov_cmd->add_option("--seed", kry_seed, "stream seed");
  krylov_cmd->add_option("--lambda", kry_lambda, "comma list of lambdas");
  krylov_cmd->add_option("--field", kry_field,
                         "indicator test function interval 'a,b'");
  krylov_cmd->add_flag("--exact-proxy", kry_proxy,
                       "run on a 16x finer grid as the exact-solution proxy");
  krylov_cmd->add_option("--out", kry_out, "CSV output path");

  std::string den_model, den_x0, den_out;
  double den_T = 1.0, den_t = 0.5;
  std::int64_t den_steps = 64, den_anchor = 0, den_paths = 100000,
               den_seed = -1;
  int den_bins = 200;
  auto* density_cmd = app.add_subcommand(
      "density", "transition histogram against the Gaussian envelope");
  density_cmd->add_option("--model", den_model, "model label")->required();
  density_cmd->add_option("--x0", den_x0, "starting point");
  density_cmd->add_option("--T", den_T, "grid horizon");
  density_cmd->add_option("--steps", den_steps, "grid steps (delta = T/steps)");
  density_cmd->add_option("--anchor-j", den_anchor, "anchor node index");
  density_cmd->add_option("--t", den_t, "histogram time (t > anchor_j*delta)");
  density_cmd->add_option("--paths", den_paths, "number of paths");
  density_cmd->add_option("--bins", den_bins, "bins per axis");
  density_cmd->add_option("--seed", den_seed, "stream seed");
  density_cmd->add_option("--out", den_out, "CSV output path");

  std::string reg_model, reg_out, reg_s = "0.25,0.5,1,2",
                                  reg_off = "0.015625,0.03125,0.0625,0.125,0.25",
                                  reg_dir = "1", reg_theta = "0.3,0.4,0.45,0.49";
  bool reg_gagliardo = false;
  double reg_box_lo = -1.0, reg_box_hi = 2.0, reg_p = 2.0;
  std::int64_t reg_grid = 3000;
  auto* regularity_cmd = app.add_subcommand(
      "regularity", "smoothed-modulus samples, alpha fit, Gagliardo seminorm");
  regularity_cmd->add_option("--model", reg_model, "model label")->required();
  regularity_cmd->add_option("--s-list", reg_s, "comma list of s values");
  regularity_cmd->add_option("--offsets", reg_off, "comma list of |y-z|");
  regularity_cmd->add_option("--direction", reg_dir, "offset direction");
  regularity_cmd->add_flag("--gagliardo", reg_gagliardo,
                           "also evaluate the Gagliardo seminorm ladder");
  regularity_cmd->add_option("--theta-list", reg_theta, "theta ladder");
  regularity_cmd->add_option("--box-lo", reg_box_lo, "box lower edge");
  regularity_cmd->add_option("--box-hi", reg_box_hi, "box upper edge");
  regularity_cmd->add_option("--grid", reg_grid, "midpoint grid count");
  regularity_cmd->add_option("--p", reg_p, "integrability exponent");
  regularity_cmd->add_option("--out", reg_out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    set_max_threads(threads);
    if (converge->parsed()) return run_converge(conv);
    if (constants_cmd->parsed()) return run_constants(const_model, const_out);
    if (simulate_cmd->parsed())
      return run_simulate(sim_model, sim_x0, sim_T, sim_steps, sim_paths,
                          sim_seed, sim_out);
    if (krylov_cmd->parsed())
      return run_krylov(kry_model, kry_x0, kry_T, kry_steps, kry_paths,
                        kry_seed, kry_lambda, kry_field, kry_proxy, kry_out);
    if (density_cmd->parsed())
      return run_density(den_model, den_x0, den_T, den_steps, den_anchor,
                         den_t, den_paths, den_bins, den_seed, den_out);
    if (regularity_cmd->parsed())
      return run_regularity(reg_model, reg_s, reg_off, reg_dir, reg_gagliardo,
                            reg_theta, reg_box_lo, reg_box_hi, reg_grid, reg_p,
                            reg_out);
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
}

}  // namespace sem
