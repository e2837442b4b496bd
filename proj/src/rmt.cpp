#include "doubleshrink/rmt.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace doubleshrink {

namespace {

bool spectrum_singular(const Eigen::VectorXd& eigenvalues) {
  const double cutoff = static_cast<double>(eigenvalues.size()) *
                        std::numeric_limits<double>::epsilon() *
                        std::max(0.0, eigenvalues.cwiseAbs().maxCoeff());
  return eigenvalues.minCoeff() <= cutoff;
}

}  // namespace

RmtFunctionals kernels_from_spectrum(const Eigen::VectorXd& eigenvalues, double eta, double c) {
  if (eigenvalues.size() < 1) throw InvalidParameter("kernels_from_spectrum: empty spectrum");
  if (!(c > 0.0)) throw InvalidParameter("kernels_from_spectrum: c must be positive");
  if (eta < 0.0) throw InvalidParameter("kernels_from_spectrum: eta must be nonnegative");
  if (eta == 0.0) {
    if (c >= 1.0)
      throw SingularCovariance("kernels_from_spectrum: eta = 0 requires c < 1");
    if (spectrum_singular(eigenvalues))
      throw SingularCovariance("kernels_from_spectrum: eta = 0 with singular sample covariance");
  }
  RmtFunctionals k;
  k.eta = eta;
  k.concentration = c;
  k.trace_inv = (eigenvalues.array() + eta).inverse().mean();
  k.trace_inv_sq = (eigenvalues.array() + eta).square().inverse().mean();
  k.v = 1.0 - c * (1.0 - eta * k.trace_inv);
  if (!(k.v > 0.0))
    throw KernelDegenerate("kernels_from_spectrum: v <= 0 (ridge blend too close to singular)");
  // The sample resolvent traces already absorb the v-dependence of the
  // derivative kernel: c*(t1 - eta*t2) converges to v1' directly (at eta = 0
  // this is the classical c/p * tr(S^{-1}) -> c*m_{-1}/(1-c) identity).
  k.v1_prime = c * (k.trace_inv - eta * k.trace_inv_sq);
  k.v2_prime = 1.0 - 1.0 / k.v + eta * k.v1_prime / (k.v * k.v);
  return k;
}

RmtFunctionals kernels_from_sample(const CovarianceEstimate& s, double eta, double c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SingularCovariance("kernels_from_sample: eigendecomposition failed");
  return kernels_from_spectrum(es.eigenvalues(), eta, c);
}

double oracle_v_from_spectrum(const Eigen::VectorXd& sigma_eigenvalues, double eta, double c) {
  if (sigma_eigenvalues.size() < 1) throw InvalidParameter("oracle_v: empty spectrum");
  if (!(c > 0.0)) throw InvalidParameter("oracle_v: c must be positive");
  if (eta < 0.0) throw InvalidParameter("oracle_v: eta must be nonnegative");
  if (!(sigma_eigenvalues.minCoeff() > 0.0))
    throw InvalidParameter("oracle_v: Sigma must be positive definite");
  if (eta == 0.0) {
    // The trace term vanishes and the equation degenerates to v = 1 - c.
    if (c >= 1.0) throw InvalidParameter("oracle_v: eta = 0 requires c < 1");
    return 1.0 - c;
  }

  const auto rhs = [&](double v) {
    const double trace = (v * sigma_eigenvalues.array() + eta).inverse().mean();
    return 1.0 - c * (1.0 - eta * trace);
  };
  constexpr double kTol = 1e-13;
  constexpr int kMaxIter = 500;

  // Damped fixed-point pass; the map is a contraction near the root for
  // moderate c and converges in a few dozen iterations.
  double v = std::max(1.0 - c, 0.5);
  for (int it = 0; it < kMaxIter; ++it) {
    const double r = rhs(v);
    const double next = std::max(0.5 * (v + r), 1e-12);
    if (std::abs(next - v) < kTol && std::abs(next - rhs(next)) < 1e-12) return next;
    v = next;
  }

  // Bisection fallback on g(v) = v - rhs(v), strictly increasing with
  // g(0+) < 0 and g(1) >= 0.
  double lo = 1e-12, hi = 1.0;
  if (rhs(hi) > hi) hi = 1.0 + c;  // defensive: cannot occur for eta > 0
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - rhs(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  v = 0.5 * (lo + hi);
  if (std::abs(v - rhs(v)) >= 1e-12)
    throw ConvergenceFailure("oracle_v: fixed point did not converge to 1e-12 residual");
  return v;
}

double oracle_v(const CovarianceEstimate& sigma, double eta, double c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SingularCovariance("oracle_v: eigendecomposition failed");
  return oracle_v_from_spectrum(es.eigenvalues(), eta, c);
}

OracleFunctionals oracle_derivatives_from_spectrum(const Eigen::VectorXd& sigma_eigenvalues,
                                                   double eta, double c, double v) {
  if (!(v > 0.0)) throw InvalidParameter("oracle_derivatives: v must be positive");
  OracleFunctionals out;
  out.eta = eta;
  out.concentration = c;
  out.v = v;
  const double tau1 = (v * sigma_eigenvalues.array() + eta).inverse().mean();
  const double tau2 = (v * sigma_eigenvalues.array() + eta).square().inverse().mean();
  const double denom = 1.0 - c + 2.0 * c * eta * tau1 - c * eta * eta * tau2;
  if (std::abs(denom) < 1e-14)
    throw KernelDegenerate("oracle_derivatives: derivative denominator is numerically zero");
  out.v1_prime = v * (c * tau1 - c * eta * tau2) / denom;
  out.v2_prime = 1.0 - 1.0 / v + eta * out.v1_prime / (v * v);
  return out;
}

OracleFunctionals oracle_derivatives(const CovarianceEstimate& sigma, double eta, double c,
                                     double v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SingularCovariance("oracle_derivatives: eigendecomposition failed");
  return oracle_derivatives_from_spectrum(es.eigenvalues(), eta, c, v);
}

CovarianceEstimate omega_lambda(const CovarianceEstimate& sigma, double lambda, double v) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw InvalidParameter("omega_lambda: lambda must be in (0, 1]");
  if (!(v > 0.0)) throw InvalidParameter("omega_lambda: v must be positive");
  Eigen::MatrixXd omega = v * lambda * sigma.matrix();
  omega.diagonal().array() += (1.0 - lambda);
  return CovarianceEstimate(std::move(omega), CovKind::True);
}

}  // namespace doubleshrink
