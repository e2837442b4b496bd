#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "doubleshrink/backtest.hpp"
#include "doubleshrink/estimator.hpp"
#include "doubleshrink/simulate.hpp"
#include "doubleshrink/types.hpp"

namespace doubleshrink {

/// Reads a date-major returns CSV (header row: date column name followed by
/// asset tickers; one row per date) and transposes it into the assets x time
/// orientation. Parsing is strict: ragged rows, duplicate tickers, empty or
/// non-numeric or non-finite cells are rejected with row/column coordinates.
/// No imputation is performed. Whether the values are simple or log returns
/// is up to the caller; the library treats them uniformly.
ReturnPanel read_returns_csv(const std::filesystem::path& path);

/// Reads a one-column weights CSV (header "asset,weight" or plain values).
Eigen::VectorXd read_weights_csv(const std::filesystem::path& path);

void write_weights_csv(const std::filesystem::path& path, const PortfolioWeights& weights,
                       const std::vector<std::string>& asset_labels);

void write_solution_json(const std::filesystem::path& path, const ShrinkageSolution& solution,
                         int p, int n);

void write_loss_curve_csv(const std::filesystem::path& path,
                          const std::vector<LossCurvePoint>& points);

void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_experiment_summary_json(const std::filesystem::path& path,
                                   const ExperimentResult& result);

void write_backtest_json(const std::filesystem::path& path, const BacktestReport& report);
void write_backtest_metrics_csv(const std::filesystem::path& path, const BacktestReport& report);
void write_weight_history_csv(const std::filesystem::path& path, const StrategyReport& strategy,
                              const std::vector<std::string>& asset_labels);

/// Shortest-exact decimal rendering used by every CSV writer (round-trips
/// the double exactly, so identical inputs give byte-identical files).
std::string format_double(double value);

}  // namespace doubleshrink
