#pragma once

#include <Eigen/Dense>

#include "doubleshrink/types.hpp"

namespace doubleshrink {

/// Sample-based scalar kernels of the ridge resolvent (S_n + eta*I)^{-1} at
/// concentration c = p/n. These are the purely data-driven counterparts of
/// the deterministic equivalents in OracleFunctionals and satisfy, entirely
/// in terms of the traces below,
///   v        = 1 - c*(1 - eta*trace_inv)
///   v1_prime = c * (trace_inv - eta*trace_inv_sq)
///   v2_prime = 1 - 1/v + eta*v1_prime/v^2
struct RmtFunctionals {
  double eta = 0.0;            // ridge parameter, eta = 1/lambda - 1
  double concentration = 0.0;  // c = p/n
  double v = 0.0;
  double v1_prime = 0.0;
  double v2_prime = 0.0;
  double trace_inv = 0.0;     // (1/p) tr((S_n + eta I)^{-1})
  double trace_inv_sq = 0.0;  // (1/p) tr((S_n + eta I)^{-2})
};

/// Deterministic-equivalent kernels computed from the true covariance
/// (test/simulation use only).
struct OracleFunctionals {
  double eta = 0.0;
  double concentration = 0.0;
  double v = 0.0;
  double v1_prime = 0.0;
  double v2_prime = 0.0;
};

/// Kernels from the eigenvalues of a sample covariance. eta = 0 is allowed
/// only for a nonsingular spectrum with c < 1; v <= 0 signals that the
/// ridge blend is too close to a singular matrix (lambda near 1, c >= 1).
RmtFunctionals kernels_from_spectrum(const Eigen::VectorXd& eigenvalues, double eta, double c);

/// Convenience wrapper: eigendecomposes S once and delegates.
RmtFunctionals kernels_from_sample(const CovarianceEstimate& s, double eta, double c);

/// Unique positive solution v of
///   v = 1 - c*(1 - (eta/p) tr((v*Sigma + eta*I)^{-1})),
/// solved on the eigenvalues of Sigma to residual < 1e-12. Damped fixed-point
/// iteration with a bisection fallback (the gap function is strictly
/// increasing on (0, 1]).
double oracle_v_from_spectrum(const Eigen::VectorXd& sigma_eigenvalues, double eta, double c);
double oracle_v(const CovarianceEstimate& sigma, double eta, double c);

/// First and second derivative kernels at a converged v. v must come from
/// oracle_v for the same (Sigma, eta, c).
OracleFunctionals oracle_derivatives_from_spectrum(const Eigen::VectorXd& sigma_eigenvalues,
                                                   double eta, double c, double v);
OracleFunctionals oracle_derivatives(const CovarianceEstimate& sigma, double eta, double c,
                                     double v);

/// Deterministic equivalent Omega_lambda = v*lambda*Sigma + (1-lambda)*I of
/// the ridge blend. lambda = 1 yields the corner v*Sigma (v = 1-c there).
CovarianceEstimate omega_lambda(const CovarianceEstimate& sigma, double lambda, double v);

}  // namespace doubleshrink
