#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "doubleshrink/core.hpp"
#include "doubleshrink/simulate.hpp"
#include "doubleshrink/targets.hpp"

using namespace doubleshrink;

TEST_CASE("equally weighted target") {
  const PortfolioWeights w4 = equally_weighted(4);
  for (int i = 0; i < 4; ++i) CHECK(w4.weights()[i] == 0.25);
  CHECK(w4.weights().sum() == 1.0);
  const PortfolioWeights w2 = equally_weighted(2);
  CHECK(w2.weights()[0] == 0.5);
  CHECK_THROWS_AS(equally_weighted(1), InvalidParameter);
}

TEST_CASE("equal correlation target") {
  SUBCASE("diagonal covariance reduces to inverse-variance weights") {
    Eigen::MatrixXd m = Eigen::Vector3d(1.0, 2.0, 4.0).asDiagonal();
    const PortfolioWeights w = equal_correlation_target(CovarianceEstimate(m, CovKind::Sample));
    const double denom = 1.0 + 0.5 + 0.25;
    CHECK(w.weights()[0] == doctest::Approx(1.0 / denom));
    CHECK(w.weights()[1] == doctest::Approx(0.5 / denom));
    CHECK(w.weights()[2] == doctest::Approx(0.25 / denom));
  }
  SUBCASE("identity gives equal weights") {
    const CovarianceEstimate eye(Eigen::MatrixXd::Identity(4, 4), CovKind::Sample);
    const PortfolioWeights w = equal_correlation_target(eye);
    for (int i = 0; i < 4; ++i) CHECK(w.weights()[i] == doctest::Approx(0.25));
  }
  SUBCASE("unit variances with common correlation give equal weights") {
    Eigen::MatrixXd m(3, 3);
    m << 1.0, 0.2, 0.2, 0.2, 1.0, 0.2, 0.2, 0.2, 1.0;
    const PortfolioWeights w = equal_correlation_target(CovarianceEstimate(m, CovKind::Sample));
    for (int i = 0; i < 3; ++i) CHECK(w.weights()[i] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("permutation equivariance") {
    const CovarianceEstimate sigma = random_covariance(5, 33);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.setIdentity();
    std::mt19937_64 rng(2);
    std::shuffle(perm.indices().data(), perm.indices().data() + 5, rng);
    const Eigen::MatrixXd permuted = perm * sigma.matrix() * perm.transpose();
    const PortfolioWeights w = equal_correlation_target(
        CovarianceEstimate(sigma.matrix(), CovKind::Sample));
    const PortfolioWeights wp =
        equal_correlation_target(CovarianceEstimate(permuted, CovKind::Sample));
    const Eigen::VectorXd expected = perm * w.weights();
    CHECK((wp.weights() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("nonpositive diagonal is rejected") {
    Eigen::MatrixXd m = Eigen::Vector2d(1.0, 0.0).asDiagonal();
    CHECK_THROWS_AS(equal_correlation_target(CovarianceEstimate(m, CovKind::Sample)),
                    InvalidData);
  }
}

TEST_CASE("resolve_target") {
  const CovarianceEstimate eye(Eigen::MatrixXd::Identity(3, 3), CovKind::Sample);
  CHECK(resolve_target(TargetSpec::equally_weighted(), eye).label() == "ew");
  CHECK(resolve_target(TargetSpec::equal_correlation(), eye).label() == "ec");
  Eigen::VectorXd custom(3);
  custom << 0.5, 0.25, 0.25;
  CHECK(resolve_target(TargetSpec::custom_vector(custom), eye).weights()[0] == 0.5);
  // degenerate custom targets are rejected, not renormalized
  Eigen::VectorXd bad(3);
  bad << 0.5, 0.25, 0.5;
  CHECK_THROWS_AS(resolve_target(TargetSpec::custom_vector(bad), eye), InvalidData);
  Eigen::VectorXd wrong_dim(2);
  wrong_dim << 0.5, 0.5;
  CHECK_THROWS_AS(resolve_target(TargetSpec::custom_vector(wrong_dim), eye), InvalidData);
}

TEST_CASE("benchmark suite") {
  ScenarioConfig cfg;
  cfg.scenario = Scenario::T5;

  SUBCASE("c < 1 includes the weight-only shrinkage corner") {
    cfg.p = 10;
    cfg.n = 40;
    cfg.seed = 6;
    const TrueModel model = draw_model(cfg, derive_seed(cfg.seed, 0));
    const ReturnPanel panel = gen_t5(model, cfg.n, derive_seed(cfg.seed, 1));
    const BenchmarkSuite suite = benchmark_suite(panel, equally_weighted(cfg.p));
    REQUIRE(suite.strategies.size() == 4);
    CHECK(suite.strategies[3].first == "bps");
    CHECK(suite.notes.empty());
    for (const auto& [label, weights] : suite.strategies)
      CHECK(weights.weights().sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("c >= 1 omits it and records why") {
    cfg.p = 24;
    cfg.n = 12;
    cfg.seed = 6;
    const TrueModel model = draw_model(cfg, derive_seed(cfg.seed, 0));
    const ReturnPanel panel = gen_t5(model, cfg.n, derive_seed(cfg.seed, 1));
    const BenchmarkSuite suite = benchmark_suite(panel, equally_weighted(cfg.p));
    REQUIRE(suite.strategies.size() == 3);
    REQUIRE(suite.notes.size() == 1);
    CHECK(suite.notes[0].find("bps") != std::string::npos);
  }
}
