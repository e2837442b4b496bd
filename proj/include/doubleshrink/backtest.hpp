#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doubleshrink/targets.hpp"
#include "doubleshrink/types.hpp"

namespace doubleshrink {

enum class StrategyKind { EquallyWeighted, TargetOnly, Traditional, Double, Bps };

std::string strategy_kind_name(StrategyKind kind);
StrategyKind strategy_kind_from_name(const std::string& name);

struct BacktestConfig {
  int window = 250;
  int rebalance_every = 1;
  std::vector<StrategyKind> strategies = {StrategyKind::EquallyWeighted,
                                          StrategyKind::Traditional, StrategyKind::TargetOnly,
                                          StrategyKind::Double};
  TargetSpec target = TargetSpec::equally_weighted();
  bool keep_weight_history = false;
  int lambda_grid = 64;
  bool clamp_psi = false;
};

/// Average weight characteristics over a T x p history of held weights:
/// mean absolute position, mean largest and smallest position, mean total
/// short mass per period, and the overall fraction of short positions.
struct WeightCharacteristics {
  double avg_abs_weight = 0.0;
  double avg_max_weight = 0.0;
  double avg_min_weight = 0.0;
  double avg_short_mass = 0.0;
  double short_fraction = 0.0;
};

WeightCharacteristics weight_characteristics(const Eigen::MatrixXd& weight_history);

/// Cumulative L1 turnover over the rebalance times. The pre-rebalance
/// weights are the previous target weights drifted through the realized
/// gross returns (holdings renormalized after returns); the first rebalance
/// establishes the position and contributes nothing. `returns` holds the
/// out-of-sample return columns matching the rows of `weight_history`.
/// NOTE: the drift step treats inputs as simple returns; for log-return
/// panels this is an approximation, and either way the resulting numbers
/// are a cost proxy, not comparable across turnover conventions.
double turnover(const Eigen::MatrixXd& weight_history, const std::vector<int>& rebalance_times,
                const Eigen::MatrixXd& returns);

struct StrategyReport {
  std::string label;
  std::vector<double> returns;  // realized out-of-sample portfolio returns
  double sigma = 0.0;           // sample standard deviation of `returns`
  double mean = 0.0;
  double sharpe = 0.0;  // mean / sigma (zero risk-free rate); NaN when sigma = 0
  double turnover = 0.0;
  WeightCharacteristics weights;
  Eigen::MatrixXd weight_history;  // T x p, kept only when requested
  std::vector<int> failed_windows;
};

struct BacktestReport {
  int window = 0;
  int rebalance_every = 1;
  int out_of_sample_periods = 0;
  std::vector<std::string> asset_labels;
  std::vector<StrategyReport> strategies;
  std::string turnover_definition;
};

/// Moving-window evaluation: at each rebalance time fit every strategy on
/// the trailing `window` columns, hold the weights until the next
/// rebalance, and record the realized portfolio return each period. A
/// strategy failure in one window keeps the previous weights and flags the
/// window in the report.
BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& config);

}  // namespace doubleshrink
