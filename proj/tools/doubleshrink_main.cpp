// doubleshrink: double-shrinkage GMV portfolio estimation.
//
// Subcommands:
//   fit         estimate (lambda*, psi*) and weights from a returns CSV
//   loss-curve  bona fide loss curve over lambda (plus oracle curves in
//               simulation mode, where the true covariance is known)
//   simulate    Monte Carlo relative-loss experiment over the four
//               data-generating scenarios
//   backtest    rolling-window out-of-sample evaluation
//
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "doubleshrink/backtest.hpp"
#include "doubleshrink/core.hpp"
#include "doubleshrink/estimator.hpp"
#include "doubleshrink/io.hpp"
#include "doubleshrink/simulate.hpp"
#include "doubleshrink/targets.hpp"

namespace ds = doubleshrink;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitNumericalError = 3;

struct CommonOptions {
  std::string input;
  std::string output_dir = ".";
  std::string target = "ew";
  int lambda_grid = 64;
  bool clamp_psi = false;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string format = "both";  // csv | json | both
  bool verbose = false;
};

// The ridge blend mixes S with the unit matrix, so the estimator is not
// scale-invariant: return units where asset variances are O(1) (percent
// returns, for daily data) keep the blend meaningful across the lambda grid.
void warn_if_scale_extreme(const ds::CovarianceEstimate& s) {
  const double mean_variance = s.matrix().trace() / static_cast<double>(s.dim());
  if (mean_variance < 1e-2 || mean_variance > 1e2)
    std::cerr << "warning: mean asset variance is " << mean_variance
              << "; the ridge blend mixes the covariance with the unit matrix, so "
                 "consider rescaling returns (e.g. to percent) so variances are O(1)\n";
}

ds::TargetSpec parse_target(const std::string& spec) {
  if (spec == "ew") return ds::TargetSpec::equally_weighted();
  if (spec == "ec") return ds::TargetSpec::equal_correlation();
  if (spec.rfind("custom:", 0) == 0) {
    const fs::path path = spec.substr(7);
    return ds::TargetSpec::custom_vector(ds::read_weights_csv(path));
  }
  throw ds::InvalidParameter("unknown target '" + spec + "' (expected ew|ec|custom:<csv>)");
}

std::vector<double> lambda_grid_points(double c, int k) {
  if (k < 1) throw ds::InvalidParameter("lambda grid needs at least 1 point");
  const auto [lo, hi] = ds::default_lambda_domain(c);
  std::vector<double> grid(static_cast<std::size_t>(k));
  if (k == 1) {
    grid[0] = 0.5 * (lo + hi);
    return grid;
  }
  for (int i = 0; i < k; ++i)
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) /
                                                 static_cast<double>(k - 1);
  return grid;
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--output-dir", opt.output_dir, "Directory for output artifacts");
  cmd->add_option("--target", opt.target, "Target portfolio: ew | ec | custom:<csv>");
  cmd->add_option("--lambda-grid", opt.lambda_grid, "Number of lambda grid points");
  cmd->add_flag("--clamp-psi", opt.clamp_psi, "Clamp psi into [0, 1] for the final weights");
  cmd->add_option("--seed", opt.seed, "RNG seed (simulation commands)");
  cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)")
      ->envname("DOUBLESHRINK_THREADS");
  cmd->add_option("--format", opt.format, "Artifact formats: csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_flag("-v,--verbose", opt.verbose, "Progress output on stderr");
}

int run_fit(const CommonOptions& opt) {
  const ds::ReturnPanel panel = ds::read_returns_csv(opt.input);
  const ds::CovarianceEstimate s = ds::sample_covariance(panel);
  warn_if_scale_extreme(s);
  const ds::PortfolioWeights target = ds::resolve_target(parse_target(opt.target), s);
  ds::FitOptions fit;
  fit.grid_size = opt.lambda_grid;
  fit.clamp_psi = opt.clamp_psi;
  const ds::ShrinkageSolution sol =
      ds::optimize_lambda(s, target, panel.concentration(), fit);
  const fs::path dir(opt.output_dir);
  ds::write_weights_csv(dir / "weights.csv", sol.final_weights, panel.asset_labels());
  ds::write_solution_json(dir / "solution.json", sol, static_cast<int>(panel.assets()),
                          static_cast<int>(panel.periods()));
  std::cout << "fit: lambda*=" << sol.lambda_star << " psi*=" << sol.psi_star
            << " loss=" << sol.loss_at_optimum << "\n";
  return kExitOk;
}

int run_loss_curve(const CommonOptions& opt, const std::string& scenario, int p, int n,
                   int burn_in) {
  const fs::path dir(opt.output_dir);
  std::vector<ds::LossCurvePoint> points;
  if (!opt.input.empty()) {
    const ds::ReturnPanel panel = ds::read_returns_csv(opt.input);
    const ds::CovarianceEstimate s = ds::sample_covariance(panel);
    warn_if_scale_extreme(s);
    const ds::PortfolioWeights target = ds::resolve_target(parse_target(opt.target), s);
    const double c = panel.concentration();
    points = ds::loss_curve(s, target, c, lambda_grid_points(c, opt.lambda_grid));
  } else {
    ds::ScenarioConfig sc;
    sc.scenario = ds::scenario_from_name(scenario);
    sc.p = p;
    sc.n = n;
    sc.seed = opt.seed;
    sc.burn_in = burn_in;
    sc.validate();
    const ds::TrueModel model = ds::draw_model(sc, ds::derive_seed(sc.seed, 0));
    const ds::ReturnPanel panel =
        ds::generate_panel(model, sc.n, sc.burn_in, ds::derive_seed(sc.seed, 1));
    const ds::CovarianceEstimate s = ds::sample_covariance(panel);
    const ds::PortfolioWeights target = ds::resolve_target(parse_target(opt.target), s);
    const double c = panel.concentration();
    points = ds::loss_curve(s, target, c, lambda_grid_points(c, opt.lambda_grid),
                            &model.unconditional_sigma);
  }
  ds::write_loss_curve_csv(dir / "loss_curve.csv", points);
  std::cout << "loss-curve: wrote " << points.size() << " grid points\n";
  return kExitOk;
}

int run_simulate(const CommonOptions& opt, const std::string& scenario, int p, int n,
                 int replications, int burn_in) {
  ds::ExperimentConfig config;
  config.scenario.scenario = ds::scenario_from_name(scenario);
  config.scenario.p = p;
  config.scenario.n = n;
  config.scenario.seed = opt.seed;
  config.scenario.replications = replications;
  config.scenario.burn_in = burn_in;
  config.target = parse_target(opt.target);
  config.lambda_grid = opt.lambda_grid;
  config.clamp_psi = opt.clamp_psi;
  config.threads = opt.threads;
  const ds::ExperimentResult result = ds::run_relative_loss_experiment(config);
  const fs::path dir(opt.output_dir);
  if (opt.format != "json") ds::write_experiment_csv(dir / "experiment.csv", result);
  if (opt.format != "csv") ds::write_experiment_summary_json(dir / "summary.json", result);
  for (const auto& s : ds::summarize(result))
    std::cout << "simulate: " << s.strategy << " mean=" << s.mean << " median=" << s.median
              << " failures=" << s.failures << "\n";
  return kExitOk;
}

int run_backtest_cmd(const CommonOptions& opt, int window, int rebalance_every,
                     const std::string& strategies, bool weight_history) {
  const ds::ReturnPanel panel = ds::read_returns_csv(opt.input);
  warn_if_scale_extreme(ds::sample_covariance(panel));
  ds::BacktestConfig config;
  config.window = window;
  config.rebalance_every = rebalance_every;
  config.target = parse_target(opt.target);
  config.keep_weight_history = weight_history;
  config.lambda_grid = opt.lambda_grid;
  config.clamp_psi = opt.clamp_psi;
  config.strategies.clear();
  if (strategies == "auto") {
    config.strategies = {ds::StrategyKind::EquallyWeighted, ds::StrategyKind::Traditional,
                         ds::StrategyKind::TargetOnly, ds::StrategyKind::Double};
    if (static_cast<double>(panel.assets()) / window < 1.0)
      config.strategies.push_back(ds::StrategyKind::Bps);
  } else {
    std::stringstream ss(strategies);
    std::string name;
    while (std::getline(ss, name, ','))
      config.strategies.push_back(ds::strategy_kind_from_name(name));
  }
  const ds::BacktestReport report = ds::run_backtest(panel, config);
  const fs::path dir(opt.output_dir);
  if (opt.format != "csv") ds::write_backtest_json(dir / "backtest.json", report);
  if (opt.format != "json") ds::write_backtest_metrics_csv(dir / "metrics.csv", report);
  if (weight_history)
    for (const auto& s : report.strategies)
      ds::write_weight_history_csv(dir / ("weights_" + s.label + ".csv"), s,
                                   report.asset_labels);
  for (const auto& s : report.strategies)
    std::cout << "backtest: " << s.label << " sigma=" << s.sigma << " mean=" << s.mean
              << " sharpe=" << s.sharpe << " turnover=" << s.turnover << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-shrinkage GMV portfolio estimation"};
  app.require_subcommand(1);

  CommonOptions fit_opt, curve_opt, sim_opt, bt_opt;

  CLI::App* fit = app.add_subcommand("fit", "Fit the double-shrinkage weights on a returns CSV");
  fit->add_option("--input", fit_opt.input, "Returns CSV (date-major)")->required();
  add_common_flags(fit, fit_opt);

  CLI::App* curve = app.add_subcommand("loss-curve", "Loss curve over the lambda grid");
  std::string curve_scenario = "t5";
  int curve_p = 150, curve_n = 300, curve_burn = 500;
  curve->add_option("--input", curve_opt.input, "Returns CSV (omit for simulation mode)");
  curve->add_option("--scenario", curve_scenario, "Simulation scenario: t5|capm|ccc|var1");
  curve->add_option("--p", curve_p, "Simulated asset count");
  curve->add_option("--n", curve_n, "Simulated sample size");
  curve->add_option("--burn-in", curve_burn, "Burn-in periods (ccc/var1)");
  add_common_flags(curve, curve_opt);

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo relative-loss experiment");
  std::string sim_scenario = "t5";
  int sim_p = 100, sim_n = 200, sim_reps = 50, sim_burn = 500;
  sim->add_option("--scenario", sim_scenario, "Scenario: t5|capm|ccc|var1");
  sim->add_option("--p", sim_p, "Asset count");
  sim->add_option("--n", sim_n, "Sample size");
  sim->add_option("--replications", sim_reps, "Monte Carlo replications");
  sim->add_option("--burn-in", sim_burn, "Burn-in periods (ccc/var1)");
  add_common_flags(sim, sim_opt);

  CLI::App* bt = app.add_subcommand("backtest", "Rolling-window out-of-sample evaluation");
  int bt_window = 250, bt_stride = 1;
  std::string bt_strategies = "auto";
  bool bt_weight_history = false;
  bt->add_option("--input", bt_opt.input, "Returns CSV (date-major)")->required();
  bt->add_option("--window", bt_window, "Rolling window size");
  bt->add_option("--rebalance-every", bt_stride, "Periods between rebalances");
  bt->add_option("--strategies", bt_strategies,
                 "Comma list of ew|target|traditional|double|bps, or 'auto'");
  bt->add_flag("--weight-history", bt_weight_history, "Write per-period weight CSVs");
  add_common_flags(bt, bt_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;  // --help is a success
  }

  try {
    if (fit->parsed()) return run_fit(fit_opt);
    if (curve->parsed())
      return run_loss_curve(curve_opt, curve_scenario, curve_p, curve_n, curve_burn);
    if (sim->parsed()) return run_simulate(sim_opt, sim_scenario, sim_p, sim_n, sim_reps, sim_burn);
    if (bt->parsed())
      return run_backtest_cmd(bt_opt, bt_window, bt_stride, bt_strategies, bt_weight_history);
  } catch (const ds::InvalidData& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ds::InvalidParameter& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ds::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return kExitOk;
}
