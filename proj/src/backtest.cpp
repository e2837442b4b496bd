#include "doubleshrink/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "doubleshrink/core.hpp"
#include "doubleshrink/estimator.hpp"

namespace doubleshrink {

std::string strategy_kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::EquallyWeighted:
      return "ew";
    case StrategyKind::TargetOnly:
      return "target";
    case StrategyKind::Traditional:
      return "traditional";
    case StrategyKind::Double:
      return "double";
    case StrategyKind::Bps:
      return "bps";
  }
  return "unknown";
}

StrategyKind strategy_kind_from_name(const std::string& name) {
  if (name == "ew") return StrategyKind::EquallyWeighted;
  if (name == "target") return StrategyKind::TargetOnly;
  if (name == "traditional") return StrategyKind::Traditional;
  if (name == "double") return StrategyKind::Double;
  if (name == "bps") return StrategyKind::Bps;
  throw InvalidParameter("unknown strategy '" + name +
                         "' (expected ew|target|traditional|double|bps)");
}

WeightCharacteristics weight_characteristics(const Eigen::MatrixXd& weight_history) {
  const Eigen::Index t_count = weight_history.rows();
  const Eigen::Index p = weight_history.cols();
  if (t_count < 1 || p < 1)
    throw InvalidParameter("weight_characteristics: empty weight history");
  WeightCharacteristics wc;
  wc.avg_abs_weight =
      weight_history.cwiseAbs().sum() / static_cast<double>(t_count * p);
  wc.avg_max_weight = weight_history.rowwise().maxCoeff().mean();
  wc.avg_min_weight = weight_history.rowwise().minCoeff().mean();
  double short_mass = 0.0;
  double short_count = 0.0;
  for (Eigen::Index i = 0; i < t_count; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (weight_history(i, j) < 0.0) {
        short_mass += weight_history(i, j);
        short_count += 1.0;
      }
  wc.avg_short_mass = short_mass / static_cast<double>(t_count);
  wc.short_fraction = short_count / static_cast<double>(t_count * p);
  return wc;
}

double turnover(const Eigen::MatrixXd& weight_history, const std::vector<int>& rebalance_times,
                const Eigen::MatrixXd& returns) {
  if (rebalance_times.size() < 2)
    throw InvalidParameter("turnover: need at least 2 rebalances");
  if (returns.rows() != weight_history.cols() || returns.cols() != weight_history.rows())
    throw InvalidParameter("turnover: returns must be p x T matching the weight history");
  double total = 0.0;
  for (std::size_t k = 1; k < rebalance_times.size(); ++k) {
    const int prev = rebalance_times[k - 1];
    const int curr = rebalance_times[k];
    if (prev < 0 || curr <= prev || curr >= static_cast<int>(weight_history.rows()))
      throw InvalidParameter("turnover: rebalance times must be increasing indices into [0, T)");
    // Drift the weights held since the previous rebalance through the
    // realized gross returns of that span, then renormalize.
    Eigen::VectorXd held = weight_history.row(prev).transpose();
    Eigen::VectorXd gross = Eigen::VectorXd::Ones(returns.rows());
    for (int t = prev; t < curr; ++t)
      gross = gross.cwiseProduct(Eigen::VectorXd::Ones(returns.rows()) + returns.col(t));
    Eigen::VectorXd drifted = held.cwiseProduct(gross);
    const double value = drifted.sum();
    if (std::abs(value) > 1e-12 && std::isfinite(value))
      drifted /= value;
    else
      drifted = held;  // degenerate span: fall back to undrifted weights
    total += (weight_history.row(curr).transpose() - drifted).cwiseAbs().sum();
  }
  return total;
}

namespace {

PortfolioWeights fit_strategy(StrategyKind kind, const CovarianceEstimate& s,
                              const PortfolioWeights& target, double c,
                              const BacktestConfig& config) {
  switch (kind) {
    case StrategyKind::EquallyWeighted:
      return equally_weighted(s.dim());
    case StrategyKind::TargetOnly:
      return target;
    case StrategyKind::Traditional:
      return traditional_gmv(s);
    case StrategyKind::Double: {
      FitOptions opt;
      opt.grid_size = config.lambda_grid;
      opt.clamp_psi = config.clamp_psi;
      return optimize_lambda(s, target, c, opt).final_weights;
    }
    case StrategyKind::Bps:
      return solve_at_lambda(s, target, c, 1.0, config.clamp_psi).final_weights;
  }
  throw InvalidParameter("fit_strategy: unknown strategy kind");
}

}  // namespace

BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& config) {
  const int n_periods = static_cast<int>(panel.periods());
  const int p = static_cast<int>(panel.assets());
  if (config.window < 3) throw InvalidParameter("run_backtest: window must be >= 3");
  if (config.window >= n_periods)
    throw InvalidParameter("run_backtest: window (" + std::to_string(config.window) +
                           ") must be smaller than the panel length (" +
                           std::to_string(n_periods) + ")");
  if (config.rebalance_every < 1)
    throw InvalidParameter("run_backtest: rebalance_every must be >= 1");
  if (config.strategies.empty())
    throw InvalidParameter("run_backtest: no strategies configured");
  const double c = static_cast<double>(p) / static_cast<double>(config.window);
  for (StrategyKind kind : config.strategies)
    if (kind == StrategyKind::Bps && c >= 1.0)
      throw InvalidParameter("run_backtest: bps requires window > p (c < 1)");

  const int oos = n_periods - config.window;  // out-of-sample periods
  BacktestReport report;
  report.window = config.window;
  report.rebalance_every = config.rebalance_every;
  report.out_of_sample_periods = oos;
  report.asset_labels = panel.asset_labels();
  report.turnover_definition =
      "sum over rebalances of the L1 distance between the new weights and the previous "
      "weights drifted through realized gross returns (renormalized holdings); not "
      "comparable to turnover conventions that skip the drift adjustment";

  const Eigen::MatrixXd oos_returns = panel.values().rightCols(oos);

  for (StrategyKind kind : config.strategies) {
    StrategyReport sr;
    sr.label = strategy_kind_name(kind);
    Eigen::MatrixXd history(oos, p);
    std::vector<int> rebalance_rows;
    Eigen::VectorXd current;
    bool have_weights = false;

    for (int s_idx = 0; s_idx < oos; ++s_idx) {
      const bool is_rebalance = (s_idx % config.rebalance_every) == 0;
      if (is_rebalance || !have_weights) {
        // Fit on the trailing window ending just before this period.
        const int fit_end = config.window + s_idx;  // exclusive
        const Eigen::MatrixXd window_data =
            panel.values().middleCols(fit_end - config.window, config.window);
        try {
          const CovarianceEstimate s = CovarianceEstimate(
              sample_covariance_matrix(window_data), CovKind::Sample);
          const PortfolioWeights target = resolve_target(config.target, s);
          current = fit_strategy(kind, s, target, c, config).weights();
          have_weights = true;
          rebalance_rows.push_back(s_idx);
        } catch (const Error&) {
          sr.failed_windows.push_back(s_idx);
          if (!have_weights) current = equally_weighted(p).weights();  // first window fallback
          have_weights = true;
          rebalance_rows.push_back(s_idx);
        }
      }
      history.row(s_idx) = current.transpose();
      sr.returns.push_back(current.dot(oos_returns.col(s_idx)));
    }

    const double t_count = static_cast<double>(sr.returns.size());
    double mean = 0.0;
    for (double r : sr.returns) mean += r;
    mean /= t_count;
    double var = 0.0;
    for (double r : sr.returns) var += (r - mean) * (r - mean);
    sr.mean = mean;
    sr.sigma = t_count > 1.0 ? std::sqrt(var / (t_count - 1.0)) : 0.0;
    sr.sharpe = sr.sigma > 0.0 ? sr.mean / sr.sigma : std::numeric_limits<double>::quiet_NaN();
    sr.weights = weight_characteristics(history);
    sr.turnover = rebalance_rows.size() >= 2 ? turnover(history, rebalance_rows, oos_returns) : 0.0;
    if (config.keep_weight_history) sr.weight_history = history;
    report.strategies.push_back(std::move(sr));
  }
  return report;
}

}  // namespace doubleshrink
