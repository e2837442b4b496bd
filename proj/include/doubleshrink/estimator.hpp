#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "doubleshrink/rmt.hpp"
#include "doubleshrink/types.hpp"

namespace doubleshrink {

/// Eigendecomposition of the sample covariance together with the target
/// projections, computed once and reused across the whole lambda grid.
/// All S_lambda quadratic forms follow algebraically from this spectrum,
/// since S_lambda = Q (lambda*D + (1-lambda)*I) Q'.
struct SampleSpectrum {
  Eigen::VectorXd eigenvalues;       // eigenvalues of S_n, ascending
  Eigen::VectorXd ones_coord;        // Q' 1
  Eigen::VectorXd target_coord;      // Q' b
  double target_sample_variance;     // b' S_n b
  double concentration;              // c = p/n
  Eigen::Index dim;                  // p
};

SampleSpectrum make_sample_spectrum(const CovarianceEstimate& s, const PortfolioWeights& b,
                                    double c);

/// The lambda-specific quadratic forms and kernels every estimator formula
/// is built from. Two construction routes are provided: the spectral route
/// (cheap along a grid) and a direct Cholesky route on the assembled
/// S_lambda (used to cross-check the spectral algebra).
struct LambdaFunctionals {
  double lambda = 0.0;
  double eta = 0.0;  // 1/lambda - 1, exactly
  double one_inv_one = 0.0;     // 1' S_lambda^{-1} 1
  double target_inv_one = 0.0;  // b' S_lambda^{-1} 1
  double one_inv2_one = 0.0;    // 1' S_lambda^{-2} 1
  double target_sample_variance = 0.0;  // b' S_n b
  RmtFunctionals kernels;
};

LambdaFunctionals lambda_functionals(const SampleSpectrum& spectrum, double lambda);
LambdaFunctionals lambda_functionals(const CovarianceEstimate& s,
                                     const CovarianceEstimate& s_lambda,
                                     const PortfolioWeights& b, const RmtFunctionals& kernels,
                                     double lambda);

/// Consistent estimator of b' Sigma Omega_lambda^{-1} 1 (the target/GMV
/// cross term): (1/(lambda*v)) * (1 - (1-lambda) * b' S_lambda^{-1} 1).
double bona_fide_cross_term(const LambdaFunctionals& f);

/// Consistent estimator of 1' Omega_lambda^{-1} Sigma Omega_lambda^{-1} 1
/// (the quadratic resolvent term), with the v1'-based correction removing
/// the high-dimensional bias of 1' S_lambda^{-2} 1.
double bona_fide_quadratic_term(const LambdaFunctionals& f);

/// One bona fide evaluation at fixed lambda. `loss` estimates the
/// normalized variance reduction achieved by the optimal weight shrinkage;
/// `psi` is the matching optimal shrinkage intensity on the regularized
/// weights (0 = all target, 1 = all ridge GMV). Finite-sample values of
/// `loss` may leave [0, 1]; `loss_in_unit_interval` flags that.
struct BonaFideEvaluation {
  double loss = 0.0;
  double psi = 0.0;
  double cross_ratio = 0.0;  // d1 / (b'Sb * 1'S_lambda^{-1}1)
  double quad_ratio = 0.0;   // (1 - v2') d2 / (b'Sb * (1'S_lambda^{-1}1)^2)
  double denominator = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  bool loss_in_unit_interval = true;
};

BonaFideEvaluation evaluate_bona_fide(const LambdaFunctionals& f);

double bona_fide_loss(const LambdaFunctionals& f);
double optimal_psi_hat(const LambdaFunctionals& f);

// Matrix-level entry points (build the functionals, then delegate).
double bona_fide_cross_term(const CovarianceEstimate& s, const CovarianceEstimate& s_lambda,
                            const PortfolioWeights& b, const RmtFunctionals& kernels,
                            double lambda);
double bona_fide_quadratic_term(const CovarianceEstimate& s_lambda, const RmtFunctionals& kernels,
                                double lambda);
double bona_fide_loss(const CovarianceEstimate& s, const CovarianceEstimate& s_lambda,
                      const PortfolioWeights& b, const RmtFunctionals& kernels, double lambda);
double optimal_psi_hat(const CovarianceEstimate& s, const CovarianceEstimate& s_lambda,
                       const PortfolioWeights& b, const RmtFunctionals& kernels, double lambda);

/// One point of the three loss curves over lambda.
struct LossCurvePoint {
  double lambda = 0.0;
  double eta = 0.0;  // 1/lambda - 1, exactly
  double bona_fide_loss = 0.0;
  double psi_hat = 0.0;
  std::optional<double> oracle_loss;         // L_2(lambda), needs Sigma
  std::optional<double> finite_sample_loss;  // L_{n;2}(lambda), needs Sigma
};

/// Fitted double-shrinkage solution at the selected (lambda, psi).
struct ShrinkageSolution {
  double lambda_star = 0.0;
  double psi_star = 0.0;
  PortfolioWeights ridge_weights;
  PortfolioWeights final_weights;
  double loss_at_optimum = 0.0;
  PortfolioWeights target;
  RmtFunctionals kernels;
  std::map<std::string, double> diagnostics;
};

struct FitOptions {
  int grid_size = 64;
  bool refine = true;        // golden-section refinement around the grid argmax
  bool clamp_psi = false;    // clamp psi into [0, 1] for the final weights
  double lambda_min = 0.0;   // 0 = use the default domain
  double lambda_max = 0.0;
};

/// Search domain for lambda: (0.01, 0.99) for c < 1 and (0.01, 0.95) for
/// c >= 1, where the blend approaches a singular matrix as lambda -> 1.
std::pair<double, double> default_lambda_domain(double c);

/// Full pipeline at a fixed lambda (lambda = 1 with nonsingular S_n
/// recovers the weight-only linear shrinkage estimator).
ShrinkageSolution solve_at_lambda(const CovarianceEstimate& s, const PortfolioWeights& b, double c,
                                  double lambda, bool clamp_psi = false);

/// Grid evaluation of the bona fide loss followed by golden-section
/// refinement in the bracketing interval. Grid points where the Theorem-type
/// denominator degenerates are skipped (treated as -inf); if every point is
/// degenerate the optimization fails. The bona fide curve is not necessarily
/// concave for c > 1, so the grid scan precedes any local refinement.
ShrinkageSolution optimize_lambda(const CovarianceEstimate& s, const PortfolioWeights& b, double c,
                                  const FitOptions& options = {});

/// Bona fide curve over the given lambdas; when sigma_truth is supplied the
/// oracle and finite-sample curves are evaluated as well (simulation use).
std::vector<LossCurvePoint> loss_curve(const CovarianceEstimate& s, const PortfolioWeights& b,
                                       double c, const std::vector<double>& lambdas,
                                       const CovarianceEstimate* sigma_truth = nullptr);

/// Oracle deterministic equivalents (require the true Sigma).
double oracle_loss(const CovarianceEstimate& sigma, const PortfolioWeights& b, double lambda,
                   double c);
double oracle_psi(const CovarianceEstimate& sigma, const PortfolioWeights& b, double lambda,
                  double c);

/// Out-of-sample variance w' Sigma w of a fixed weight vector.
double finite_sample_loss(const CovarianceEstimate& sigma, const PortfolioWeights& w);

/// Loss-minimizing shrinkage intensity toward b for the ridge weights of
/// S_lambda under a known Sigma:
///   psi* = b' Sigma (b - w) / ((b - w)' Sigma (b - w)),  w = ridge GMV.
double finite_sample_psi(const CovarianceEstimate& sigma, const CovarianceEstimate& s_lambda,
                         const PortfolioWeights& b);

/// Relative loss of the target portfolio, b'Sigma b * 1'Sigma^{-1}1 - 1.
/// Zero exactly when b is the GMV portfolio of Sigma.
double target_relative_loss(const CovarianceEstimate& sigma, const PortfolioWeights& b);

}  // namespace doubleshrink
