#include "doubleshrink/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace doubleshrink {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const std::string what = "row " + std::to_string(row) + ", column " + std::to_string(col);
  if (cell.empty()) throw InvalidData("missing value at " + what);
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw InvalidData("non-numeric value '" + cell + "' at " + what);
  if (!std::isfinite(value))
    throw InvalidData("non-finite value '" + cell + "' at " + what);
  return value;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidData("cannot open output file " + path.string());
  return out;
}

nlohmann::json json_number(double v) {
  // nlohmann serializes NaN/inf as null already; keep that behavior explicit.
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

ReturnPanel read_returns_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData("cannot open returns file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidData("empty returns file " + path.string());
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3)
    throw InvalidData("returns header needs a date column and at least 2 tickers");
  std::vector<std::string> tickers(header.begin() + 1, header.end());
  std::set<std::string> seen;
  for (const auto& t : tickers) {
    if (t.empty()) throw InvalidData("empty ticker in returns header");
    if (!seen.insert(t).second) throw InvalidData("duplicate ticker '" + t + "' in header");
  }

  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InvalidData("ragged row " + std::to_string(row_number) + ": expected " +
                        std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    dates.push_back(cells[0]);
    std::vector<double> values;
    values.reserve(tickers.size());
    for (std::size_t j = 1; j < cells.size(); ++j)
      values.push_back(parse_cell(cells[j], row_number, j + 1));
    rows.push_back(std::move(values));
  }
  if (rows.size() < 3)
    throw InvalidData("returns file has " + std::to_string(rows.size()) +
                      " data rows; need at least 3");

  // Transpose date-major rows into the assets x time orientation.
  Eigen::MatrixXd values(static_cast<Eigen::Index>(tickers.size()),
                         static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t i = 0; i < tickers.size(); ++i)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[t][i];
  return ReturnPanel(std::move(values), std::move(tickers), std::move(dates));
}

Eigen::VectorXd read_weights_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData("cannot open weights file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(trimmed);
    const std::string& last = cells.back();
    if (row_number == 1 && !last.empty() &&
        last.find_first_not_of("+-.0123456789eEnainf") != std::string::npos)
      continue;  // header row
    values.push_back(parse_cell(last, row_number, cells.size()));
  }
  if (values.empty()) throw InvalidData("weights file " + path.string() + " has no values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_weights_csv(const std::filesystem::path& path, const PortfolioWeights& weights,
                       const std::vector<std::string>& asset_labels) {
  if (static_cast<Eigen::Index>(asset_labels.size()) != weights.size())
    throw InvalidParameter("write_weights_csv: label count mismatch");
  std::ofstream out = open_output(path);
  out << "asset,weight\n";
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    out << asset_labels[static_cast<std::size_t>(i)] << ','
        << format_double(weights.weights()[i]) << '\n';
}

void write_solution_json(const std::filesystem::path& path, const ShrinkageSolution& solution,
                         int p, int n) {
  nlohmann::json j;
  j["lambda_star"] = json_number(solution.lambda_star);
  j["psi_star"] = json_number(solution.psi_star);
  j["loss"] = json_number(solution.loss_at_optimum);
  j["p"] = p;
  j["n"] = n;
  j["c"] = json_number(static_cast<double>(p) / static_cast<double>(n));
  j["target"] = solution.target.label();
  j["kernels"] = {{"eta", json_number(solution.kernels.eta)},
                  {"c", json_number(solution.kernels.concentration)},
                  {"v", json_number(solution.kernels.v)},
                  {"v1_prime", json_number(solution.kernels.v1_prime)},
                  {"v2_prime", json_number(solution.kernels.v2_prime)},
                  {"trace_inv", json_number(solution.kernels.trace_inv)},
                  {"trace_inv_sq", json_number(solution.kernels.trace_inv_sq)}};
  nlohmann::json diag;
  for (const auto& [key, value] : solution.diagnostics) diag[key] = json_number(value);
  j["diagnostics"] = diag;
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

void write_loss_curve_csv(const std::filesystem::path& path,
                          const std::vector<LossCurvePoint>& points) {
  std::ofstream out = open_output(path);
  const bool with_truth = !points.empty() && points.front().oracle_loss.has_value();
  out << "lambda,eta,bona_fide_loss,psi_hat";
  if (with_truth) out << ",oracle_loss,finite_sample_loss";
  out << '\n';
  for (const auto& pt : points) {
    out << format_double(pt.lambda) << ',' << format_double(pt.eta) << ','
        << format_double(pt.bona_fide_loss) << ',' << format_double(pt.psi_hat);
    if (with_truth)
      out << ',' << format_double(pt.oracle_loss.value_or(std::nan(""))) << ','
          << format_double(pt.finite_sample_loss.value_or(std::nan("")));
    out << '\n';
  }
}

void write_experiment_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  std::ofstream out = open_output(path);
  out << "scenario,p,n,c,replication,strategy,relative_loss,lambda_star,psi_star,error\n";
  const auto& sc = result.config.scenario;
  const double c = static_cast<double>(sc.p) / static_cast<double>(sc.n);
  for (const auto& cell : result.cells) {
    std::string error = cell.error;
    std::replace(error.begin(), error.end(), ',', ';');
    out << scenario_name(sc.scenario) << ',' << sc.p << ',' << sc.n << ',' << format_double(c)
        << ',' << cell.replication << ',' << cell.strategy << ','
        << format_double(cell.relative_loss) << ',' << format_double(cell.lambda_star) << ','
        << format_double(cell.psi_star) << ',' << error << '\n';
  }
}

void write_experiment_summary_json(const std::filesystem::path& path,
                                   const ExperimentResult& result) {
  const std::vector<StrategySummary> summaries = summarize(result);
  nlohmann::json j;
  const auto& sc = result.config.scenario;
  j["scenario"] = scenario_name(sc.scenario);
  j["p"] = sc.p;
  j["n"] = sc.n;
  j["c"] = json_number(static_cast<double>(sc.p) / static_cast<double>(sc.n));
  j["replications"] = sc.replications;
  j["seed"] = sc.seed;
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : summaries) {
    strategies.push_back({{"strategy", s.strategy},
                          {"count", s.count},
                          {"failures", s.failures},
                          {"mean", json_number(s.mean)},
                          {"median", json_number(s.median)},
                          {"q05", json_number(s.q05)},
                          {"q25", json_number(s.q25)},
                          {"q75", json_number(s.q75)},
                          {"q95", json_number(s.q95)}});
  }
  j["strategies"] = strategies;
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

void write_backtest_json(const std::filesystem::path& path, const BacktestReport& report) {
  nlohmann::json j;
  j["window"] = report.window;
  j["rebalance_every"] = report.rebalance_every;
  j["out_of_sample_periods"] = report.out_of_sample_periods;
  j["turnover_definition"] = report.turnover_definition;
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : report.strategies) {
    nlohmann::json js;
    js["label"] = s.label;
    js["sigma"] = json_number(s.sigma);
    js["mean"] = json_number(s.mean);
    js["sharpe"] = json_number(s.sharpe);
    js["turnover"] = json_number(s.turnover);
    js["avg_abs_weight"] = json_number(s.weights.avg_abs_weight);
    js["avg_max_weight"] = json_number(s.weights.avg_max_weight);
    js["avg_min_weight"] = json_number(s.weights.avg_min_weight);
    js["avg_short_mass"] = json_number(s.weights.avg_short_mass);
    js["short_fraction"] = json_number(s.weights.short_fraction);
    js["failed_windows"] = s.failed_windows;
    nlohmann::json returns = nlohmann::json::array();
    for (double r : s.returns) returns.push_back(json_number(r));
    js["out_of_sample_returns"] = returns;
    strategies.push_back(std::move(js));
  }
  j["strategies"] = strategies;
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

void write_backtest_metrics_csv(const std::filesystem::path& path, const BacktestReport& report) {
  std::ofstream out = open_output(path);
  out << "strategy,sigma,mean,sharpe,turnover,avg_abs_weight,avg_max_weight,avg_min_weight,"
         "avg_short_mass,short_fraction,failed_windows\n";
  for (const auto& s : report.strategies) {
    out << s.label << ',' << format_double(s.sigma) << ',' << format_double(s.mean) << ','
        << format_double(s.sharpe) << ',' << format_double(s.turnover) << ','
        << format_double(s.weights.avg_abs_weight) << ','
        << format_double(s.weights.avg_max_weight) << ','
        << format_double(s.weights.avg_min_weight) << ','
        << format_double(s.weights.avg_short_mass) << ','
        << format_double(s.weights.short_fraction) << ',' << s.failed_windows.size() << '\n';
  }
}

void write_weight_history_csv(const std::filesystem::path& path, const StrategyReport& strategy,
                              const std::vector<std::string>& asset_labels) {
  if (strategy.weight_history.size() == 0)
    throw InvalidParameter("write_weight_history_csv: strategy has no stored weight history");
  std::ofstream out = open_output(path);
  out << "period";
  for (const auto& label : asset_labels) out << ',' << label;
  out << '\n';
  for (Eigen::Index t = 0; t < strategy.weight_history.rows(); ++t) {
    out << t;
    for (Eigen::Index j = 0; j < strategy.weight_history.cols(); ++j)
      out << ',' << format_double(strategy.weight_history(t, j));
    out << '\n';
  }
}

}  // namespace doubleshrink
