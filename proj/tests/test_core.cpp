#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "doubleshrink/core.hpp"
#include "doubleshrink/types.hpp"

using namespace doubleshrink;

namespace {

Eigen::MatrixXd random_returns(int p, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd y(p, n);
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < p; ++i) y(i, t) = normal(rng);
  return y;
}

}  // namespace

TEST_CASE("sample covariance: constant columns give the zero matrix") {
  Eigen::MatrixXd y(3, 5);
  y.colwise() = Eigen::Vector3d(0.4, -1.2, 7.0);
  const Eigen::MatrixXd s = sample_covariance_matrix(y);
  CHECK(s.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("sample covariance: hand-computed 2x2 example, divisor n") {
  Eigen::MatrixXd y(2, 2);
  y << 1.0, -1.0, 2.0, 0.0;
  const Eigen::MatrixXd s = sample_covariance_matrix(y);
  // row means (0, 1); centered rows both (1, -1); S = (1/2) * [[2,2],[2,2]]
  CHECK(s(0, 0) == doctest::Approx(1.0));
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK(s(1, 0) == doctest::Approx(1.0));
  CHECK(s(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sample covariance: converges to identity for iid standard normals") {
  const int n = 100000;
  const Eigen::MatrixXd y = random_returns(2, n, 91);
  const Eigen::MatrixXd s = sample_covariance_matrix(y);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s(0, 0) - 1.0) < tol);
  CHECK(std::abs(s(1, 1) - 1.0) < tol);
  CHECK(std::abs(s(0, 1)) < tol);
}

TEST_CASE("sample covariance: invariant to adding a constant vector to every column") {
  const Eigen::MatrixXd y = random_returns(4, 20, 5);
  Eigen::MatrixXd shifted = y;
  shifted.colwise() += Eigen::Vector4d(3.0, -7.5, 0.1, 42.0);
  const Eigen::MatrixXd a = sample_covariance_matrix(y);
  const Eigen::MatrixXd b = sample_covariance_matrix(shifted);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sample covariance: scaling the data by k scales S by k^2") {
  const Eigen::MatrixXd y = random_returns(3, 15, 17);
  const Eigen::MatrixXd a = sample_covariance_matrix(y);
  const Eigen::MatrixXd b = sample_covariance_matrix((2.5 * y).eval());
  CHECK((b - 6.25 * a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("return panel rejects bad shapes and non-finite data") {
  CHECK_THROWS_AS(ReturnPanel(Eigen::MatrixXd::Zero(1, 5)), InvalidData);
  CHECK_THROWS_AS(ReturnPanel(Eigen::MatrixXd::Zero(3, 2)), InvalidData);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 4);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ReturnPanel{bad}, InvalidData);
}

TEST_CASE("ridge blend corners and hand example") {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.0, 0.0, 0.0;
  const CovarianceEstimate s(m, CovKind::Sample);

  SUBCASE("lambda = 1 leaves S unchanged") {
    const CovarianceEstimate blended = ridge_blend(s, 1.0);
    CHECK((blended.matrix() - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK(blended.kind() == CovKind::Ridge);
  }
  SUBCASE("identity is a fixed point") {
    const CovarianceEstimate eye(Eigen::MatrixXd::Identity(3, 3), CovKind::Sample);
    const CovarianceEstimate blended = ridge_blend(eye, 0.3);
    CHECK((blended.matrix() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("diag(2,0) at lambda 0.5 gives diag(1.5, 0.5)") {
    const CovarianceEstimate blended = ridge_blend(s, 0.5);
    CHECK(blended.matrix()(0, 0) == doctest::Approx(1.5));
    CHECK(blended.matrix()(1, 1) == doctest::Approx(0.5));
    CHECK(blended.matrix()(0, 1) == 0.0);
  }
  SUBCASE("lambda outside (0,1] is rejected") {
    CHECK_THROWS_AS(ridge_blend(s, 0.0), InvalidParameter);
    CHECK_THROWS_AS(ridge_blend(s, 1.2), InvalidParameter);
    CHECK_THROWS_AS(ridge_blend(s, -0.1), InvalidParameter);
  }
}

TEST_CASE("ridge blend preserves symmetry and eigenvalue bounds") {
  const Eigen::MatrixXd y = random_returns(6, 30, 7);
  const CovarianceEstimate s(sample_covariance_matrix(y), CovKind::Sample);
  const double lambda = 0.35;
  const CovarianceEstimate blended = ridge_blend(s, lambda);
  CHECK((blended.matrix() - blended.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blended.matrix());
  const double max_eig_s =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.matrix()).eigenvalues().maxCoeff();
  CHECK(es.eigenvalues().minCoeff() >= (1.0 - lambda) - 1e-12);
  CHECK(es.eigenvalues().maxCoeff() <= lambda * max_eig_s + (1.0 - lambda) + 1e-12);
}

TEST_CASE("tikhonov weights") {
  SUBCASE("identity gives equal weights") {
    const CovarianceEstimate eye(Eigen::MatrixXd::Identity(4, 4), CovKind::Ridge, 0.5);
    const PortfolioWeights w = tikhonov_weights(eye);
    for (int i = 0; i < 4; ++i) CHECK(w.weights()[i] == doctest::Approx(0.25));
  }
  SUBCASE("diag(1,4) gives inverse-variance weights (4/5, 1/5)") {
    Eigen::MatrixXd m = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    const PortfolioWeights w = tikhonov_weights(CovarianceEstimate(m, CovKind::Ridge, 0.5));
    CHECK(w.weights()[0] == doctest::Approx(0.8));
    CHECK(w.weights()[1] == doctest::Approx(0.2));
  }
  SUBCASE("weights sum to one") {
    const Eigen::MatrixXd y = random_returns(5, 40, 3);
    const CovarianceEstimate blended =
        ridge_blend(CovarianceEstimate(sample_covariance_matrix(y), CovKind::Sample), 0.7);
    CHECK(tikhonov_weights(blended).weights().sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("singular blend (lambda = 1, c >= 1) throws") {
    const Eigen::MatrixXd y = random_returns(6, 4, 11);
    const CovarianceEstimate s(sample_covariance_matrix(y), CovKind::Sample);
    CHECK_THROWS_AS(tikhonov_weights(ridge_blend(s, 1.0)), SingularCovariance);
  }
}

TEST_CASE("traditional GMV") {
  SUBCASE("identity gives equal weights") {
    const CovarianceEstimate eye(Eigen::MatrixXd::Identity(3, 3), CovKind::Sample);
    const PortfolioWeights w = traditional_gmv(eye);
    for (int i = 0; i < 3; ++i) CHECK(w.weights()[i] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("diag(1,4)") {
    Eigen::MatrixXd m = Eigen::Vector2d(1.0, 4.0).asDiagonal();
    const PortfolioWeights w = traditional_gmv(CovarianceEstimate(m, CovKind::Sample));
    CHECK(w.weights()[0] == doctest::Approx(0.8));
    CHECK(w.weights()[1] == doctest::Approx(0.2));
  }
  SUBCASE("rank-1 matrix goes through the pseudoinverse") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 1.0, 1.0, 1.0;
    const PortfolioWeights w = traditional_gmv(CovarianceEstimate(m, CovKind::Sample));
    CHECK(w.weights()[0] == doctest::Approx(0.5));
    CHECK(w.weights()[1] == doctest::Approx(0.5));
  }
  SUBCASE("ones vector in the null space is degenerate") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, -1.0, -1.0, 1.0;
    CHECK_THROWS_AS(traditional_gmv(CovarianceEstimate(m, CovKind::Sample)), DegenerateSolution);
  }
}

TEST_CASE("tikhonov at lambda = 1 equals traditional GMV for nonsingular S") {
  const Eigen::MatrixXd y = random_returns(8, 50, 23);
  const CovarianceEstimate s(sample_covariance_matrix(y), CovKind::Sample);
  const PortfolioWeights a = tikhonov_weights(ridge_blend(s, 1.0));
  const PortfolioWeights b = traditional_gmv(s);
  CHECK((a.weights() - b.weights()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("combine weights") {
  const PortfolioWeights w(Eigen::Vector2d(1.0, 0.0), "w");
  const PortfolioWeights b(Eigen::Vector2d(0.0, 1.0), "b");
  CHECK((combine_weights(w, b, 1.0).weights() - w.weights()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((combine_weights(w, b, 0.0).weights() - b.weights()).cwiseAbs().maxCoeff() == 0.0);
  const PortfolioWeights mid = combine_weights(w, b, 0.5);
  CHECK(mid.weights()[0] == doctest::Approx(0.5));
  CHECK(mid.weights()[1] == doctest::Approx(0.5));
  // affine combination: sums to one for any real psi
  for (double psi : {-3.7, -0.2, 0.4, 1.9, 12.0})
    CHECK(combine_weights(w, b, psi).weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("portfolio weights must sum to one") {
  CHECK_THROWS_AS(PortfolioWeights(Eigen::Vector2d(0.6, 0.6)), InvalidData);
  CHECK_NOTHROW(PortfolioWeights(Eigen::Vector2d(0.6, 0.4)));
}
