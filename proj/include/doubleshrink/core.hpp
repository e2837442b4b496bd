#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "doubleshrink/types.hpp"

namespace doubleshrink {

/// Sample covariance of an assets x time observation matrix, centered at the
/// cross-time mean and divided by n (NOT n-1; the asymptotics in this
/// library are stated for the 1/n normalization, so callers coming from
/// pandas/NumPy conventions should not "fix" this).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sample_covariance_matrix(
    const Eigen::MatrixBase<Derived>& observations) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index p = observations.rows();
  const Eigen::Index n = observations.cols();
  if (n < 2) throw InvalidData("sample_covariance: need at least 2 columns");
  const Mat centered = observations.derived().colwise() - observations.derived().rowwise().mean();
  Mat s = Mat::Zero(p, p);
  s.template selfadjointView<Eigen::Lower>().rankUpdate(centered, Scalar(1) / Scalar(n));
  s.template triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

inline CovarianceEstimate sample_covariance(const ReturnPanel& panel) {
  return CovarianceEstimate(sample_covariance_matrix(panel.values()), CovKind::Sample);
}

/// Convex blend lambda*S + (1-lambda)*I. Positive definite for lambda < 1;
/// lambda = 1 returns S unchanged (all beliefs on the sample estimate).
inline CovarianceEstimate ridge_blend(const CovarianceEstimate& s, double lambda) {
  if (s.kind() != CovKind::Sample)
    throw InvalidParameter("ridge_blend: input must be a sample covariance");
  if (!(lambda > 0.0) || lambda > 1.0)
    throw InvalidParameter("ridge_blend: lambda must be in (0, 1], got " + std::to_string(lambda));
  Eigen::MatrixXd blended = lambda * s.matrix();
  blended.diagonal().array() += (1.0 - lambda);
  return CovarianceEstimate(std::move(blended), CovKind::Ridge, lambda);
}

/// Minimum-variance weights A^{-1}1 / (1'A^{-1}1) through one Cholesky
/// factorization; never forms an explicit inverse.
template <typename Derived>
Eigen::VectorXd min_variance_weights_matrix(const Eigen::MatrixBase<Derived>& a) {
  const Eigen::Index p = a.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(a.derived());
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("min_variance_weights: matrix is not positive definite");
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(p));
  const double denom = x.sum();
  if (std::abs(denom) < 1e-14 * std::max(1.0, x.cwiseAbs().sum()))
    throw DegenerateSolution("min_variance_weights: 1'A^{-1}1 is numerically zero");
  return x / denom;
}

/// Tikhonov-regularized GMV weights S_lambda^{-1}1 / (1'S_lambda^{-1}1).
/// Requires a positive definite input; a Ridge blend with lambda = 1 over a
/// rank-deficient sample covariance (c >= 1) fails here.
inline PortfolioWeights tikhonov_weights(const CovarianceEstimate& s_lambda) {
  if (s_lambda.kind() == CovKind::Sample)
    throw InvalidParameter("tikhonov_weights: pass a Ridge blend (use ridge_blend), or True");
  try {
    return PortfolioWeights(min_variance_weights_matrix(s_lambda.matrix()), "tikhonov");
  } catch (const SingularCovariance&) {
    throw SingularCovariance(
        "tikhonov_weights: S_lambda is singular (lambda = 1 with c >= 1 is not supported)");
  }
}

/// GMV weights for a known positive definite covariance (oracle use).
inline PortfolioWeights gmv_weights(const CovarianceEstimate& sigma) {
  return PortfolioWeights(min_variance_weights_matrix(sigma.matrix()), "gmv");
}

/// Traditional sample GMV weights S^+ 1 / (1'S^+ 1). Uses the ordinary
/// inverse while S is numerically nonsingular and falls back to the
/// Moore-Penrose pseudoinverse otherwise. The numerical rank cutoff is
/// dim * eps * |eig|_max, the standard pseudoinverse threshold.
inline PortfolioWeights traditional_gmv(const CovarianceEstimate& s) {
  if (s.kind() != CovKind::Sample)
    throw InvalidParameter("traditional_gmv: input must be a sample covariance");
  const Eigen::Index p = s.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
  if (es.info() != Eigen::Success)
    throw SingularCovariance("traditional_gmv: eigendecomposition failed");
  const Eigen::VectorXd& d = es.eigenvalues();
  const double cutoff =
      static_cast<double>(p) * std::numeric_limits<double>::epsilon() * d.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
  for (Eigen::Index i = 0; i < p; ++i)
    if (d[i] > cutoff) inv[i] = 1.0 / d[i];
  const Eigen::VectorXd proj = es.eigenvectors().transpose() * Eigen::VectorXd::Ones(p);
  const Eigen::VectorXd x = es.eigenvectors() * inv.cwiseProduct(proj).matrix();
  const double denom = x.sum();
  if (std::abs(denom) < 1e-12 * std::max(1.0, x.cwiseAbs().sum()))
    throw DegenerateSolution("traditional_gmv: 1'S^+1 is numerically zero");
  return PortfolioWeights(x / denom, "traditional");
}

/// psi * w + (1 - psi) * b. An affine combination of two fully-invested
/// portfolios, so the result sums to one for any real psi.
inline PortfolioWeights combine_weights(const PortfolioWeights& w, const PortfolioWeights& b,
                                        double psi, std::string label = "") {
  if (w.size() != b.size())
    throw InvalidParameter("combine_weights: dimension mismatch");
  Eigen::VectorXd combined = psi * w.weights() + (1.0 - psi) * b.weights();
  return PortfolioWeights(std::move(combined), label.empty() ? w.label() : std::move(label));
}

/// x' A y for symmetric A.
template <typename Derived>
double quadratic_form(const Eigen::MatrixBase<Derived>& a, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y) {
  return x.dot(a.derived().template selfadjointView<Eigen::Lower>() * y);
}

}  // namespace doubleshrink
