#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "doubleshrink/backtest.hpp"
#include "doubleshrink/simulate.hpp"

using namespace doubleshrink;

namespace {

ReturnPanel toy_panel(int p, int n, unsigned seed) {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::T5;
  cfg.p = p;
  cfg.n = n;
  cfg.seed = seed;
  const TrueModel model = draw_model(cfg, derive_seed(seed, 0));
  return gen_t5(model, n, derive_seed(seed, 1));
}

}  // namespace

TEST_CASE("weight characteristics") {
  SUBCASE("constant ew history satisfies the closed-form identities") {
    const int p = 5;
    const Eigen::MatrixXd history = Eigen::MatrixXd::Constant(7, p, 1.0 / p);
    const WeightCharacteristics wc = weight_characteristics(history);
    CHECK(wc.avg_abs_weight == doctest::Approx(1.0 / p).epsilon(1e-15));
    CHECK(wc.avg_max_weight == doctest::Approx(1.0 / p).epsilon(1e-15));
    CHECK(wc.avg_min_weight == doctest::Approx(1.0 / p).epsilon(1e-15));
    CHECK(wc.avg_short_mass == 0.0);
    CHECK(wc.short_fraction == 0.0);
  }
  SUBCASE("single row hand example") {
    Eigen::MatrixXd history(1, 3);
    history << 0.5, 0.75, -0.25;
    const WeightCharacteristics wc = weight_characteristics(history);
    CHECK(wc.avg_abs_weight == doctest::Approx(0.5));
    CHECK(wc.avg_max_weight == doctest::Approx(0.75));
    CHECK(wc.avg_min_weight == doctest::Approx(-0.25));
    CHECK(wc.avg_short_mass == doctest::Approx(-0.25));
    CHECK(wc.short_fraction == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("nonnegative history has zero short measures") {
    Eigen::MatrixXd history(2, 2);
    history << 0.3, 0.7, 0.9, 0.1;
    const WeightCharacteristics wc = weight_characteristics(history);
    CHECK(wc.avg_short_mass == 0.0);
    CHECK(wc.short_fraction == 0.0);
  }
}

TEST_CASE("turnover") {
  SUBCASE("constant weights with zero returns") {
    const Eigen::MatrixXd history = Eigen::MatrixXd::Constant(4, 2, 0.5);
    const Eigen::MatrixXd returns = Eigen::MatrixXd::Zero(2, 4);
    CHECK(turnover(history, {0, 1, 2, 3}, returns) == 0.0);
  }
  SUBCASE("full flip without drift costs 2") {
    Eigen::MatrixXd history(2, 2);
    history << 1.0, 0.0, 0.0, 1.0;
    const Eigen::MatrixXd returns = Eigen::MatrixXd::Zero(2, 2);
    CHECK(turnover(history, {0, 1}, returns) == doctest::Approx(2.0));
  }
  SUBCASE("drift correction: ew rebalanced after unequal returns") {
    Eigen::MatrixXd history(2, 2);
    history << 0.5, 0.5, 0.5, 0.5;
    Eigen::MatrixXd returns(2, 2);
    returns << 1.0, 0.0, 0.0, 0.0;  // asset 1 doubles in period 0
    // drifted weights before the second rebalance: (2/3, 1/3)
    CHECK(turnover(history, {0, 1}, returns) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("fewer than two rebalances is rejected") {
    const Eigen::MatrixXd history = Eigen::MatrixXd::Constant(2, 2, 0.5);
    const Eigen::MatrixXd returns = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(turnover(history, {0}, returns), InvalidParameter);
  }
}

TEST_CASE("run_backtest with the constant ew strategy") {
  const ReturnPanel panel = toy_panel(4, 30, 3);
  BacktestConfig config;
  config.window = 10;
  config.strategies = {StrategyKind::EquallyWeighted};
  const BacktestReport report = run_backtest(panel, config);
  REQUIRE(report.strategies.size() == 1);
  const StrategyReport& ew = report.strategies[0];
  CHECK(report.out_of_sample_periods == 20);
  REQUIRE(static_cast<int>(ew.returns.size()) == 20);

  SUBCASE("returns equal the cross-sectional mean each period") {
    for (int s = 0; s < 20; ++s)
      CHECK(ew.returns[static_cast<std::size_t>(s)] ==
            doctest::Approx(panel.values().col(10 + s).mean()).epsilon(1e-12));
  }
  SUBCASE("closed-form weight identities and the Sharpe relation") {
    CHECK(ew.weights.avg_abs_weight == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ew.weights.avg_max_weight == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ew.weights.avg_min_weight == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ew.weights.avg_short_mass == 0.0);
    CHECK(ew.weights.short_fraction == 0.0);
    CHECK(std::abs(ew.sharpe * ew.sigma - ew.mean) < 1e-12 * std::max(1.0, std::abs(ew.mean)));
  }
}

TEST_CASE("run_backtest boundary: panel one period longer than the window") {
  const ReturnPanel panel = toy_panel(3, 11, 9);
  BacktestConfig config;
  config.window = 10;
  config.strategies = {StrategyKind::Traditional};
  const BacktestReport report = run_backtest(panel, config);
  REQUIRE(report.strategies.size() == 1);
  CHECK(report.strategies[0].returns.size() == 1);
  CHECK(report.strategies[0].sigma == 0.0);  // a single return has no spread

  BacktestConfig too_big = config;
  too_big.window = 11;
  CHECK_THROWS_AS(run_backtest(panel, too_big), InvalidParameter);
}

TEST_CASE("run_backtest records failures and carries weights forward") {
  // Asset 2 is constant over the first window, so the equal-correlation
  // target sees a zero variance and fails there; later windows recover.
  const int window = 6;
  const int n = 16;
  Eigen::MatrixXd values(2, n);
  for (int t = 0; t < n; ++t) {
    values(0, t) = std::sin(1.0 + 3.0 * t) * 0.01;
    values(1, t) = t < window ? 0.0 : std::cos(2.0 + t) * 0.02;
  }
  const ReturnPanel panel(values);
  BacktestConfig config;
  config.window = window;
  config.strategies = {StrategyKind::TargetOnly};
  config.target = TargetSpec::equal_correlation();
  const BacktestReport report = run_backtest(panel, config);
  REQUIRE(report.strategies.size() == 1);
  CHECK(!report.strategies[0].failed_windows.empty());
  CHECK(report.strategies[0].failed_windows.front() == 0);
  CHECK(static_cast<int>(report.strategies[0].returns.size()) == n - window);
}

TEST_CASE("report does not depend on strategy evaluation order") {
  const ReturnPanel panel = toy_panel(5, 40, 21);
  BacktestConfig a;
  a.window = 12;
  a.strategies = {StrategyKind::EquallyWeighted, StrategyKind::Traditional,
                  StrategyKind::Double};
  BacktestConfig b = a;
  b.strategies = {StrategyKind::Double, StrategyKind::EquallyWeighted,
                  StrategyKind::Traditional};
  const BacktestReport ra = run_backtest(panel, a);
  const BacktestReport rb = run_backtest(panel, b);
  for (const auto& sa : ra.strategies)
    for (const auto& sb : rb.strategies)
      if (sa.label == sb.label) {
        CHECK(sa.sigma == sb.sigma);
        CHECK(sa.mean == sb.mean);
        CHECK(sa.turnover == sb.turnover);
      }
}

TEST_CASE("double shrinkage beats the traditional strategy out of sample near c = 1") {
  // Simulated scenario-1 stream with p/window = 0.8: the regularized
  // pipeline should realize a smaller out-of-sample standard deviation.
  const ReturnPanel panel = toy_panel(20, 160, 2024);
  BacktestConfig config;
  config.window = 25;
  config.strategies = {StrategyKind::Traditional, StrategyKind::Double};
  const BacktestReport report = run_backtest(panel, config);
  REQUIRE(report.strategies.size() == 2);
  const StrategyReport& trad = report.strategies[0];
  const StrategyReport& dbl = report.strategies[1];
  CHECK(trad.failed_windows.empty());
  CHECK(dbl.failed_windows.empty());
  CHECK(dbl.sigma < trad.sigma);
}

TEST_CASE("rebalance stride holds weights between rebalances") {
  const ReturnPanel panel = toy_panel(3, 30, 14);
  BacktestConfig config;
  config.window = 10;
  config.rebalance_every = 5;
  config.strategies = {StrategyKind::Traditional};
  config.keep_weight_history = true;
  const BacktestReport report = run_backtest(panel, config);
  const Eigen::MatrixXd& history = report.strategies[0].weight_history;
  REQUIRE(history.rows() == 20);
  for (int s = 0; s < 20; ++s) {
    const int anchor = (s / 5) * 5;
    CHECK((history.row(s) - history.row(anchor)).cwiseAbs().maxCoeff() == 0.0);
  }
}
