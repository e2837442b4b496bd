#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "doubleshrink/targets.hpp"
#include "doubleshrink/types.hpp"

namespace doubleshrink {

enum class Scenario { T5, CAPM, CccGarch, Var1 };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::T5;
  int p = 100;
  int n = 200;
  std::uint64_t seed = 1;
  int replications = 1;
  int burn_in = 500;  // GARCH/VAR only

  void validate() const;
};

/// One draw of the data-generating model. `sigma` parametrizes the
/// innovations; `unconditional_sigma` is the covariance of the observed
/// returns and is what every oracle/loss evaluation uses (they differ for
/// CAPM, where it is sigma + beta beta', and for VAR(1)).
struct TrueModel {
  Scenario scenario = Scenario::T5;
  Eigen::VectorXd mu;
  CovarianceEstimate sigma;
  CovarianceEstimate unconditional_sigma;
  Eigen::MatrixXd sigma_sqrt;  // symmetric square root of sigma
  // CAPM
  Eigen::VectorXd beta;
  // CCC-GARCH
  Eigen::VectorXd arch;       // alpha_{j,1}
  Eigen::VectorXd garch;      // beta_{j,1}
  Eigen::VectorXd intercept;  // alpha_{j,0}, fixed so the stationary variance is sigma_jj
  Eigen::MatrixXd corr_sqrt;  // symmetric square root of the constant correlation matrix
  // VAR(1)
  Eigen::VectorXd ar;  // diagonal of Gamma
};

/// Deterministic sub-stream seed: splitmix64 of the base seed and index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Random rotation-invariant covariance Q Lambda Q' with Q Haar-distributed
/// (QR of a Gaussian matrix, sign-fixed) and eigenvalues log-uniform on
/// [0.1, 10], so the spectrum is bounded and the condition number is at
/// most 100.
CovarianceEstimate random_covariance(int p, std::uint64_t seed);

/// Draws mu, Sigma and the scenario-specific parameters.
TrueModel draw_model(const ScenarioConfig& config, std::uint64_t seed);

ReturnPanel gen_t5(const TrueModel& model, int n, std::uint64_t seed);
ReturnPanel gen_capm(const TrueModel& model, int n, std::uint64_t seed);
ReturnPanel gen_ccc_garch(const TrueModel& model, int n, int burn_in, std::uint64_t seed);
ReturnPanel gen_var1(const TrueModel& model, int n, int burn_in, std::uint64_t seed);

/// Dispatches on model.scenario.
ReturnPanel generate_panel(const TrueModel& model, int n, int burn_in, std::uint64_t seed);

struct ExperimentConfig {
  ScenarioConfig scenario;
  TargetSpec target = TargetSpec::equally_weighted();
  int lambda_grid = 64;
  bool clamp_psi = false;
  int threads = 0;  // 0 = hardware concurrency
};

/// One (replication, strategy) cell. lambda_star / psi_star are NaN for
/// strategies that do not fit shrinkage intensities; `error` is nonempty
/// when the strategy failed on that replication (the cell is kept, the
/// experiment continues).
struct ExperimentCell {
  int replication = 0;
  std::string strategy;
  double relative_loss = 0.0;
  double lambda_star = 0.0;
  double psi_star = 0.0;
  std::string error;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentCell> cells;
};

struct StrategySummary {
  std::string strategy;
  int count = 0;
  int failures = 0;
  double mean = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

/// Relative-loss Monte Carlo: per replication draw a model, generate a
/// panel, fit {traditional, target, double, bps when c < 1}, and record
/// V_w / V_GMV - 1 under the scenario's unconditional covariance.
/// Replications run in parallel; every replication owns a seed derived
/// from (config seed, replication index), so results do not depend on the
/// thread count.
ExperimentResult run_relative_loss_experiment(const ExperimentConfig& config);

std::vector<StrategySummary> summarize(const ExperimentResult& result);

}  // namespace doubleshrink
