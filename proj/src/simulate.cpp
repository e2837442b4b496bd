#include "doubleshrink/simulate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "doubleshrink/core.hpp"
#include "doubleshrink/estimator.hpp"

namespace doubleshrink {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::T5:
      return "t5";
    case Scenario::CAPM:
      return "capm";
    case Scenario::CccGarch:
      return "ccc";
    case Scenario::Var1:
      return "var1";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "t5") return Scenario::T5;
  if (name == "capm") return Scenario::CAPM;
  if (name == "ccc") return Scenario::CccGarch;
  if (name == "var1") return Scenario::Var1;
  throw InvalidParameter("unknown scenario '" + name + "' (expected t5|capm|ccc|var1)");
}

void ScenarioConfig::validate() const {
  if (p < 2) throw InvalidParameter("ScenarioConfig: p must be >= 2");
  if (n < 3) throw InvalidParameter("ScenarioConfig: n must be >= 3");
  if (replications < 1) throw InvalidParameter("ScenarioConfig: replications must be >= 1");
  if (burn_in < 0) throw InvalidParameter("ScenarioConfig: burn_in must be >= 0");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < 0.0)
    throw InvalidData("symmetric_sqrt: matrix is not positive semidefinite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + 0x9E3779B97F4A7C15ull * (index + 1));
}

CovarianceEstimate random_covariance(int p, std::uint64_t seed) {
  if (p < 2) throw InvalidParameter("random_covariance: p must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(p, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);  // sign fix makes Q Haar-distributed

  std::uniform_real_distribution<double> log_eig(std::log(0.1), std::log(10.0));
  Eigen::VectorXd eigs(p);
  for (int i = 0; i < p; ++i) eigs[i] = std::exp(log_eig(rng));

  const Eigen::MatrixXd raw = q * eigs.asDiagonal() * q.transpose();
  Eigen::MatrixXd sigma = 0.5 * (raw + raw.transpose());
  return CovarianceEstimate(std::move(sigma), CovKind::True);
}

TrueModel draw_model(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  const int p = config.p;
  CovarianceEstimate sigma = random_covariance(p, derive_seed(seed, 0));

  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_real_distribution<double> mu_dist(-0.1, 0.1);
  Eigen::VectorXd mu(p);
  for (int i = 0; i < p; ++i) mu[i] = mu_dist(rng);

  TrueModel model{config.scenario,
                  std::move(mu),
                  sigma,
                  sigma,  // overwritten below when the scenarios differ
                  symmetric_sqrt(sigma.matrix()),
                  {},
                  {},
                  {},
                  {},
                  {},
                  {}};

  switch (config.scenario) {
    case Scenario::T5:
      break;
    case Scenario::CAPM: {
      std::uniform_real_distribution<double> beta_dist(-1.0, 1.0);
      model.beta.resize(p);
      for (int i = 0; i < p; ++i) model.beta[i] = beta_dist(rng);
      const Eigen::MatrixXd raw = sigma.matrix() + model.beta * model.beta.transpose();
      Eigen::MatrixXd total = 0.5 * (raw + raw.transpose());
      model.unconditional_sigma = CovarianceEstimate(std::move(total), CovKind::True);
      break;
    }
    case Scenario::CccGarch: {
      std::uniform_real_distribution<double> arch_dist(0.0, 0.1);
      std::uniform_real_distribution<double> garch_dist(0.6, 0.7);
      model.arch.resize(p);
      model.garch.resize(p);
      model.intercept.resize(p);
      for (int i = 0; i < p; ++i) {
        model.arch[i] = arch_dist(rng);
        model.garch[i] = garch_dist(rng);
        // alpha_0 = sigma_jj (1 - alpha_1 - beta_1): stationary variance sigma_jj.
        model.intercept[i] =
            sigma.matrix()(i, i) * (1.0 - model.arch[i] - model.garch[i]);
      }
      const Eigen::VectorXd inv_vol = sigma.matrix().diagonal().cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd raw = inv_vol.asDiagonal() * sigma.matrix() * inv_vol.asDiagonal();
      const Eigen::MatrixXd corr = 0.5 * (raw + raw.transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(corr);
      if (llt.info() != Eigen::Success)
        throw InvalidData("draw_model: induced correlation matrix is not positive definite");
      model.corr_sqrt = symmetric_sqrt(corr);
      break;
    }
    case Scenario::Var1: {
      std::uniform_real_distribution<double> ar_dist(-0.9, 0.9);
      model.ar.resize(p);
      for (int i = 0; i < p; ++i) model.ar[i] = ar_dist(rng);
      // Diagonal Gamma makes the stationary covariance elementwise:
      // Var_ij = sigma_ij / (1 - gamma_i gamma_j).
      // Elementwise symmetric by construction: both factors commute in i, j.
      Eigen::MatrixXd stat(p, p);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          stat(i, j) = sigma.matrix()(i, j) / (1.0 - model.ar[i] * model.ar[j]);
      model.unconditional_sigma = CovarianceEstimate(std::move(stat), CovKind::True);
      break;
    }
  }
  return model;
}

ReturnPanel gen_t5(const TrueModel& model, int n, std::uint64_t seed) {
  if (n < 3) throw InvalidParameter("gen_t5: n must be >= 3");
  const int p = static_cast<int>(model.mu.size());
  std::mt19937_64 rng(seed);
  std::student_t_distribution<double> t5(5.0);
  const double scale = 1.0 / std::sqrt(5.0 / 3.0);  // t(5) variance is 5/3
  Eigen::MatrixXd x(p, n);
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < p; ++i) x(i, t) = t5(rng) * scale;
  Eigen::MatrixXd y = model.sigma_sqrt * x;
  y.colwise() += model.mu;
  return ReturnPanel(std::move(y));
}

ReturnPanel gen_capm(const TrueModel& model, int n, std::uint64_t seed) {
  if (n < 3) throw InvalidParameter("gen_capm: n must be >= 3");
  if (model.beta.size() != model.mu.size())
    throw InvalidParameter("gen_capm: model has no CAPM betas");
  const int p = static_cast<int>(model.mu.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd y(p, n);
  Eigen::VectorXd x(p);
  for (int t = 0; t < n; ++t) {
    const double z = normal(rng);
    for (int i = 0; i < p; ++i) x[i] = normal(rng);
    y.col(t) = model.mu + model.beta * z + model.sigma_sqrt * x;
  }
  return ReturnPanel(std::move(y));
}

ReturnPanel gen_ccc_garch(const TrueModel& model, int n, int burn_in, std::uint64_t seed) {
  if (n < 3) throw InvalidParameter("gen_ccc_garch: n must be >= 3");
  if (model.arch.size() != model.mu.size())
    throw InvalidParameter("gen_ccc_garch: model has no GARCH coefficients");
  const int p = static_cast<int>(model.mu.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd y(p, n);
  Eigen::VectorXd x(p), eps(p);
  Eigen::VectorXd h = model.sigma.matrix().diagonal();  // h_{j,0} = sigma_jj
  Eigen::VectorXd prev_centered = Eigen::VectorXd::Zero(p);
  bool have_prev = false;
  for (int t = -burn_in; t < n; ++t) {
    if (have_prev)
      h = model.intercept.array() + model.arch.array() * prev_centered.array().square() +
          model.garch.array() * h.array();
    for (int i = 0; i < p; ++i) x[i] = normal(rng);
    eps = model.corr_sqrt * x;  // unit-variance innovations with correlation C
    const Eigen::VectorXd centered = h.cwiseSqrt().cwiseProduct(eps);
    if (t >= 0) y.col(t) = model.mu + centered;
    prev_centered = centered;
    have_prev = true;
  }
  return ReturnPanel(std::move(y));
}

ReturnPanel gen_var1(const TrueModel& model, int n, int burn_in, std::uint64_t seed) {
  if (n < 3) throw InvalidParameter("gen_var1: n must be >= 3");
  if (model.ar.size() != model.mu.size())
    throw InvalidParameter("gen_var1: model has no AR coefficients");
  if (model.ar.cwiseAbs().maxCoeff() >= 1.0)
    throw InvalidData("gen_var1: |gamma_i| >= 1 is not stationary");
  const int p = static_cast<int>(model.mu.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd y(p, n);
  Eigen::VectorXd x(p);
  Eigen::VectorXd centered = Eigen::VectorXd::Zero(p);  // y_0 - mu
  for (int t = -burn_in; t < n; ++t) {
    for (int i = 0; i < p; ++i) x[i] = normal(rng);
    centered = model.ar.cwiseProduct(centered) + model.sigma_sqrt * x;
    if (t >= 0) y.col(t) = model.mu + centered;
  }
  return ReturnPanel(std::move(y));
}

ReturnPanel generate_panel(const TrueModel& model, int n, int burn_in, std::uint64_t seed) {
  switch (model.scenario) {
    case Scenario::T5:
      return gen_t5(model, n, seed);
    case Scenario::CAPM:
      return gen_capm(model, n, seed);
    case Scenario::CccGarch:
      return gen_ccc_garch(model, n, burn_in, seed);
    case Scenario::Var1:
      return gen_var1(model, n, burn_in, seed);
  }
  throw InvalidParameter("generate_panel: unknown scenario");
}

namespace {

struct StrategyFit {
  double relative_loss = std::numeric_limits<double>::quiet_NaN();
  double lambda_star = std::numeric_limits<double>::quiet_NaN();
  double psi_star = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

void run_replication(const ExperimentConfig& config, int rep, std::vector<ExperimentCell>& cells,
                     std::size_t offset, const std::vector<std::string>& strategy_names) {
  const std::uint64_t rep_seed = derive_seed(config.scenario.seed, static_cast<std::uint64_t>(rep));
  const TrueModel model = draw_model(config.scenario, derive_seed(rep_seed, 0));
  const ReturnPanel panel =
      generate_panel(model, config.scenario.n, config.scenario.burn_in, derive_seed(rep_seed, 1));

  const CovarianceEstimate& sigma_eval = model.unconditional_sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_eval.matrix());
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("run_replication: unconditional covariance not positive definite");
  const double v_gmv =
      1.0 / llt.solve(Eigen::VectorXd::Ones(sigma_eval.dim())).sum();

  const CovarianceEstimate s = sample_covariance(panel);
  const double c = panel.concentration();

  const auto relative_loss = [&](const PortfolioWeights& w) {
    return finite_sample_loss(sigma_eval, w) / v_gmv - 1.0;
  };

  for (std::size_t k = 0; k < strategy_names.size(); ++k) {
    const std::string& name = strategy_names[k];
    StrategyFit fit;
    try {
      if (name == "traditional") {
        fit.relative_loss = relative_loss(traditional_gmv(s));
      } else if (name == "target") {
        fit.relative_loss = relative_loss(resolve_target(config.target, s));
      } else if (name == "double") {
        FitOptions opt;
        opt.grid_size = config.lambda_grid;
        opt.clamp_psi = config.clamp_psi;
        const ShrinkageSolution sol = optimize_lambda(s, resolve_target(config.target, s), c, opt);
        fit.relative_loss = relative_loss(sol.final_weights);
        fit.lambda_star = sol.lambda_star;
        fit.psi_star = sol.psi_star;
      } else if (name == "bps") {
        const ShrinkageSolution sol =
            solve_at_lambda(s, resolve_target(config.target, s), c, 1.0, config.clamp_psi);
        fit.relative_loss = relative_loss(sol.final_weights);
        fit.lambda_star = 1.0;
        fit.psi_star = sol.psi_star;
      } else {
        fit.error = "unknown strategy";
      }
    } catch (const Error& e) {
      fit.error = e.what();
    }
    ExperimentCell& cell = cells[offset + k];
    cell.replication = rep;
    cell.strategy = name;
    cell.relative_loss = fit.relative_loss;
    cell.lambda_star = fit.lambda_star;
    cell.psi_star = fit.psi_star;
    cell.error = fit.error;
  }
}

}  // namespace

ExperimentResult run_relative_loss_experiment(const ExperimentConfig& config) {
  config.scenario.validate();
  const double c =
      static_cast<double>(config.scenario.p) / static_cast<double>(config.scenario.n);
  std::vector<std::string> strategy_names = {"traditional", "target", "double"};
  if (c < 1.0) strategy_names.push_back("bps");

  const int reps = config.scenario.replications;
  ExperimentResult result;
  result.config = config;
  result.cells.resize(static_cast<std::size_t>(reps) * strategy_names.size());

  int threads = config.threads;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, reps));

  std::atomic<int> next{0};
  std::vector<std::string> worker_errors(static_cast<std::size_t>(threads));
  const auto worker = [&](int tid) {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        run_replication(config, rep, result.cells, static_cast<std::size_t>(rep) * strategy_names.size(),
                        strategy_names);
      } catch (const std::exception& e) {
        worker_errors[static_cast<std::size_t>(tid)] = e.what();
        return;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& err : worker_errors)
    if (!err.empty()) throw Error("run_relative_loss_experiment: " + err);
  return result;
}

std::vector<StrategySummary> summarize(const ExperimentResult& result) {
  std::vector<std::string> names;
  for (const auto& cell : result.cells)
    if (std::find(names.begin(), names.end(), cell.strategy) == names.end())
      names.push_back(cell.strategy);

  const auto quantile = [](std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };

  std::vector<StrategySummary> out;
  for (const auto& name : names) {
    StrategySummary s;
    s.strategy = name;
    std::vector<double> losses;
    for (const auto& cell : result.cells) {
      if (cell.strategy != name) continue;
      ++s.count;
      if (!cell.error.empty() || !std::isfinite(cell.relative_loss)) {
        ++s.failures;
        continue;
      }
      losses.push_back(cell.relative_loss);
    }
    std::sort(losses.begin(), losses.end());
    if (!losses.empty()) {
      s.mean = std::accumulate(losses.begin(), losses.end(), 0.0) /
               static_cast<double>(losses.size());
      s.median = quantile(losses, 0.5);
      s.q05 = quantile(losses, 0.05);
      s.q25 = quantile(losses, 0.25);
      s.q75 = quantile(losses, 0.75);
      s.q95 = quantile(losses, 0.95);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace doubleshrink
