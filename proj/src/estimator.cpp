#include "doubleshrink/estimator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "doubleshrink/core.hpp"

namespace doubleshrink {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2

double blend_eigenvalue(double d, double lambda) { return lambda * d + (1.0 - lambda); }

}  // namespace

SampleSpectrum make_sample_spectrum(const CovarianceEstimate& s, const PortfolioWeights& b,
                                    double c) {
  if (s.kind() != CovKind::Sample)
    throw InvalidParameter("make_sample_spectrum: input must be a sample covariance");
  if (s.dim() != b.size()) throw InvalidParameter("make_sample_spectrum: dimension mismatch");
  if (!(c > 0.0)) throw InvalidParameter("make_sample_spectrum: c must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
  if (es.info() != Eigen::Success)
    throw SingularCovariance("make_sample_spectrum: eigendecomposition failed");
  SampleSpectrum out;
  out.eigenvalues = es.eigenvalues().cwiseMax(0.0);  // clip tiny negative round-off
  out.ones_coord = es.eigenvectors().transpose() * Eigen::VectorXd::Ones(s.dim());
  out.target_coord = es.eigenvectors().transpose() * b.weights();
  out.target_sample_variance = quadratic_form(s.matrix(), b.weights(), b.weights());
  out.concentration = c;
  out.dim = s.dim();
  return out;
}

LambdaFunctionals lambda_functionals(const SampleSpectrum& spectrum, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw InvalidParameter("lambda_functionals: lambda must be in (0, 1]");
  LambdaFunctionals f;
  f.lambda = lambda;
  f.eta = 1.0 / lambda - 1.0;
  const Eigen::ArrayXd blended =
      spectrum.eigenvalues.array() * lambda + (1.0 - lambda);
  if (blended.minCoeff() <= 0.0)
    throw SingularCovariance("lambda_functionals: S_lambda is singular");
  const Eigen::ArrayXd inv = blended.inverse();
  f.one_inv_one = (spectrum.ones_coord.array().square() * inv).sum();
  f.target_inv_one = (spectrum.ones_coord.array() * spectrum.target_coord.array() * inv).sum();
  f.one_inv2_one = (spectrum.ones_coord.array().square() * inv.square()).sum();
  f.target_sample_variance = spectrum.target_sample_variance;
  f.kernels = kernels_from_spectrum(spectrum.eigenvalues, f.eta, spectrum.concentration);
  return f;
}

LambdaFunctionals lambda_functionals(const CovarianceEstimate& s,
                                     const CovarianceEstimate& s_lambda,
                                     const PortfolioWeights& b, const RmtFunctionals& kernels,
                                     double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw InvalidParameter("lambda_functionals: lambda must be in (0, 1]");
  if (s.dim() != s_lambda.dim() || s.dim() != b.size())
    throw InvalidParameter("lambda_functionals: dimension mismatch");
  LambdaFunctionals f;
  f.lambda = lambda;
  f.eta = 1.0 / lambda - 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(s_lambda.matrix());
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("lambda_functionals: S_lambda is not positive definite");
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(s.dim()));
  f.one_inv_one = x.sum();
  f.target_inv_one = b.weights().dot(x);
  f.one_inv2_one = x.squaredNorm();  // 1'S^{-2}1 = |S^{-1}1|^2 for symmetric S
  f.target_sample_variance = quadratic_form(s.matrix(), b.weights(), b.weights());
  f.kernels = kernels;
  return f;
}

double bona_fide_cross_term(const LambdaFunctionals& f) {
  if (!(f.kernels.v > 0.0)) throw KernelDegenerate("bona_fide_cross_term: v <= 0");
  return (1.0 / (f.lambda * f.kernels.v)) * (1.0 - (1.0 - f.lambda) * f.target_inv_one);
}

double bona_fide_quadratic_term(const LambdaFunctionals& f) {
  if (!(f.kernels.v > 0.0)) throw KernelDegenerate("bona_fide_quadratic_term: v <= 0");
  const double ratio = f.kernels.v1_prime / f.kernels.v;
  const double denom = 1.0 - ratio * f.eta;
  if (std::abs(denom) < 1e-12)
    throw KernelDegenerate("bona_fide_quadratic_term: correction denominator is zero");
  const double corrected =
      (f.one_inv2_one - (1.0 / f.lambda) * ratio * f.one_inv_one) / denom;
  return (1.0 / (f.lambda * f.kernels.v)) * f.one_inv_one -
         ((1.0 - f.lambda) / (f.lambda * f.kernels.v)) * corrected;
}

BonaFideEvaluation evaluate_bona_fide(const LambdaFunctionals& f) {
  BonaFideEvaluation e;
  e.d1 = bona_fide_cross_term(f);
  e.d2 = bona_fide_quadratic_term(f);
  const double bsb = f.target_sample_variance;
  if (!(bsb > 0.0)) throw LossDegenerate("evaluate_bona_fide: b'Sb <= 0");
  if (!(f.one_inv_one > 0.0)) throw LossDegenerate("evaluate_bona_fide: 1'S_lambda^{-1}1 <= 0");
  e.cross_ratio = e.d1 / (bsb * f.one_inv_one);
  e.quad_ratio = (1.0 - f.kernels.v2_prime) * e.d2 / (bsb * f.one_inv_one * f.one_inv_one);
  e.denominator = 1.0 - 2.0 * e.cross_ratio + e.quad_ratio;
  if (!(e.denominator > 0.0))
    throw LossDegenerate("evaluate_bona_fide: loss denominator <= 0 (lambda too close to 1?)");
  const double num = 1.0 - e.cross_ratio;
  e.loss = num * num / e.denominator;
  e.psi = num / e.denominator;
  e.loss_in_unit_interval = (e.loss >= 0.0 && e.loss <= 1.0);
  return e;
}

double bona_fide_loss(const LambdaFunctionals& f) { return evaluate_bona_fide(f).loss; }
double optimal_psi_hat(const LambdaFunctionals& f) { return evaluate_bona_fide(f).psi; }

double bona_fide_cross_term(const CovarianceEstimate& s, const CovarianceEstimate& s_lambda,
                            const PortfolioWeights& b, const RmtFunctionals& kernels,
                            double lambda) {
  return bona_fide_cross_term(lambda_functionals(s, s_lambda, b, kernels, lambda));
}

double bona_fide_quadratic_term(const CovarianceEstimate& s_lambda, const RmtFunctionals& kernels,
                                double lambda) {
  // Only the resolvent functionals of the ones vector enter d2.
  LambdaFunctionals f;
  f.lambda = lambda;
  f.eta = 1.0 / lambda - 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(s_lambda.matrix());
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("bona_fide_quadratic_term: S_lambda is not positive definite");
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(s_lambda.dim()));
  f.one_inv_one = x.sum();
  f.one_inv2_one = x.squaredNorm();
  f.kernels = kernels;
  return bona_fide_quadratic_term(f);
}

double bona_fide_loss(const CovarianceEstimate& s, const CovarianceEstimate& s_lambda,
                      const PortfolioWeights& b, const RmtFunctionals& kernels, double lambda) {
  return bona_fide_loss(lambda_functionals(s, s_lambda, b, kernels, lambda));
}

double optimal_psi_hat(const CovarianceEstimate& s, const CovarianceEstimate& s_lambda,
                       const PortfolioWeights& b, const RmtFunctionals& kernels, double lambda) {
  return optimal_psi_hat(lambda_functionals(s, s_lambda, b, kernels, lambda));
}

std::pair<double, double> default_lambda_domain(double c) {
  return {0.01, c < 1.0 ? 0.99 : 0.95};
}

namespace {

ShrinkageSolution assemble_solution(const CovarianceEstimate& s, const SampleSpectrum& spectrum,
                                    const PortfolioWeights& b, double lambda, bool clamp_psi) {
  const LambdaFunctionals f = lambda_functionals(spectrum, lambda);
  const BonaFideEvaluation e = evaluate_bona_fide(f);
  PortfolioWeights ridge = tikhonov_weights(ridge_blend(s, lambda));
  ridge.set_label("ridge");
  double psi = e.psi;
  if (clamp_psi) psi = std::clamp(psi, 0.0, 1.0);
  PortfolioWeights final_w = combine_weights(ridge, b, psi, "double");
  ShrinkageSolution sol{lambda,
                        psi,
                        std::move(ridge),
                        std::move(final_w),
                        e.loss,
                        b,
                        f.kernels,
                        {}};
  sol.diagnostics["d1"] = e.d1;
  sol.diagnostics["d2"] = e.d2;
  sol.diagnostics["target_sample_variance"] = f.target_sample_variance;
  sol.diagnostics["one_inv_one"] = f.one_inv_one;
  sol.diagnostics["loss_denominator"] = e.denominator;
  sol.diagnostics["psi_raw"] = e.psi;
  sol.diagnostics["loss_in_unit_interval"] = e.loss_in_unit_interval ? 1.0 : 0.0;
  return sol;
}

}  // namespace

ShrinkageSolution solve_at_lambda(const CovarianceEstimate& s, const PortfolioWeights& b, double c,
                                  double lambda, bool clamp_psi) {
  const SampleSpectrum spectrum = make_sample_spectrum(s, b, c);
  return assemble_solution(s, spectrum, b, lambda, clamp_psi);
}

ShrinkageSolution optimize_lambda(const CovarianceEstimate& s, const PortfolioWeights& b, double c,
                                  const FitOptions& options) {
  if (options.grid_size < 16)
    throw InvalidParameter("optimize_lambda: grid_size must be at least 16");
  auto [lo, hi] = default_lambda_domain(c);
  if (options.lambda_min > 0.0) lo = options.lambda_min;
  if (options.lambda_max > 0.0) hi = options.lambda_max;
  if (!(lo > 0.0) || !(hi < 1.0) || !(lo < hi))
    throw InvalidParameter("optimize_lambda: lambda domain must satisfy 0 < lo < hi < 1");

  const SampleSpectrum spectrum = make_sample_spectrum(s, b, c);
  const auto objective = [&](double lambda) {
    try {
      return bona_fide_loss(lambda_functionals(spectrum, lambda));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const int k = options.grid_size;
  std::vector<double> grid(k), values(k);
  for (int i = 0; i < k; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    values[i] = objective(grid[i]);
  }
  const auto best_it = std::max_element(values.begin(), values.end());
  if (!std::isfinite(*best_it))
    throw OptimizationFailure("optimize_lambda: bona fide loss degenerate on the whole grid");
  const int best = static_cast<int>(best_it - values.begin());

  double lambda_star = grid[best];
  if (options.refine) {
    // Golden-section maximization inside the bracketing interval.
    double a = grid[std::max(best - 1, 0)];
    double d = grid[std::min(best + 1, k - 1)];
    double x1 = d - kGolden * (d - a);
    double x2 = a + kGolden * (d - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (d - a > 1e-6) {
      if (f1 >= f2) {
        d = x2;
        x2 = x1;
        f2 = f1;
        x1 = d - kGolden * (d - a);
        f1 = objective(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (d - a);
        f2 = objective(x2);
      }
    }
    const double mid = 0.5 * (a + d);
    if (objective(mid) >= values[best]) lambda_star = mid;
  }
  return assemble_solution(s, spectrum, b, lambda_star, options.clamp_psi);
}

namespace {

struct OracleEvaluation {
  double loss;
  double psi;
};

OracleEvaluation evaluate_oracle(const CovarianceEstimate& sigma, const PortfolioWeights& b,
                                 double lambda, double c) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw InvalidParameter("oracle_loss: lambda must be in (0, 1]");
  if (sigma.dim() != b.size()) throw InvalidParameter("oracle_loss: dimension mismatch");
  const double eta = 1.0 / lambda - 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw SingularCovariance("oracle_loss: eigendecomposition failed");
  const double v = oracle_v_from_spectrum(es.eigenvalues(), eta, c);
  const OracleFunctionals od = oracle_derivatives_from_spectrum(es.eigenvalues(), eta, c, v);

  const CovarianceEstimate omega = omega_lambda(sigma, lambda, v);
  Eigen::LLT<Eigen::MatrixXd> llt(omega.matrix());
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("oracle_loss: Omega_lambda is not positive definite");
  const Eigen::VectorXd u = llt.solve(Eigen::VectorXd::Ones(sigma.dim()));  // Omega^{-1} 1
  const double one_omega_one = u.sum();
  const Eigen::VectorXd sigma_u = sigma.matrix().selfadjointView<Eigen::Lower>() * u;
  const double bsb = quadratic_form(sigma.matrix(), b.weights(), b.weights());
  const double cross = b.weights().dot(sigma_u) / one_omega_one;          // b'Sigma Omega^{-1}1 / 1'Omega^{-1}1
  const double quad = u.dot(sigma_u) / (one_omega_one * one_omega_one);   // 1'Omega^{-1}Sigma Omega^{-1}1 / (...)^2

  const double r1 = cross / bsb;
  const double r2 = (1.0 - od.v2_prime) * quad / bsb;
  const double denom = 1.0 - 2.0 * r1 + r2;
  if (!(denom > 0.0)) throw LossDegenerate("oracle_loss: denominator <= 0");
  const double num = 1.0 - r1;
  return {num * num / denom, num / denom};
}

}  // namespace

double oracle_loss(const CovarianceEstimate& sigma, const PortfolioWeights& b, double lambda,
                   double c) {
  return evaluate_oracle(sigma, b, lambda, c).loss;
}

double oracle_psi(const CovarianceEstimate& sigma, const PortfolioWeights& b, double lambda,
                  double c) {
  return evaluate_oracle(sigma, b, lambda, c).psi;
}

double finite_sample_loss(const CovarianceEstimate& sigma, const PortfolioWeights& w) {
  if (sigma.dim() != w.size()) throw InvalidParameter("finite_sample_loss: dimension mismatch");
  return quadratic_form(sigma.matrix(), w.weights(), w.weights());
}

double finite_sample_psi(const CovarianceEstimate& sigma, const CovarianceEstimate& s_lambda,
                         const PortfolioWeights& b) {
  const PortfolioWeights w = tikhonov_weights(s_lambda);
  const Eigen::VectorXd diff = b.weights() - w.weights();
  const Eigen::VectorXd sigma_diff = sigma.matrix().selfadjointView<Eigen::Lower>() * diff;
  const double denom = diff.dot(sigma_diff);
  if (denom <= 0.0) return 0.0;  // b coincides with the ridge weights; loss is flat in psi
  return b.weights().dot(sigma_diff) / denom;
}

double target_relative_loss(const CovarianceEstimate& sigma, const PortfolioWeights& b) {
  if (sigma.dim() != b.size()) throw InvalidParameter("target_relative_loss: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.matrix());
  if (llt.info() != Eigen::Success)
    throw SingularCovariance("target_relative_loss: Sigma is not positive definite");
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(sigma.dim()));
  const double bsb = quadratic_form(sigma.matrix(), b.weights(), b.weights());
  return bsb * x.sum() - 1.0;
}

std::vector<LossCurvePoint> loss_curve(const CovarianceEstimate& s, const PortfolioWeights& b,
                                       double c, const std::vector<double>& lambdas,
                                       const CovarianceEstimate* sigma_truth) {
  const SampleSpectrum spectrum = make_sample_spectrum(s, b, c);
  std::vector<LossCurvePoint> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    LossCurvePoint pt;
    pt.lambda = lambda;
    pt.eta = 1.0 / lambda - 1.0;
    try {
      const BonaFideEvaluation e = evaluate_bona_fide(lambda_functionals(spectrum, lambda));
      pt.bona_fide_loss = e.loss;
      pt.psi_hat = e.psi;
    } catch (const Error&) {
      pt.bona_fide_loss = std::numeric_limits<double>::quiet_NaN();
      pt.psi_hat = std::numeric_limits<double>::quiet_NaN();
    }
    if (sigma_truth != nullptr) {
      try {
        pt.oracle_loss = oracle_loss(*sigma_truth, b, lambda, c);
      } catch (const Error&) {
        pt.oracle_loss = std::numeric_limits<double>::quiet_NaN();
      }
      try {
        // Finite-sample loss L_{n;2}: the normalized variance reduction of
        // the optimally shrunk ridge weights under the true Sigma.
        const PortfolioWeights w = tikhonov_weights(ridge_blend(s, lambda));
        const Eigen::VectorXd diff = b.weights() - w.weights();
        const Eigen::VectorXd sigma_diff =
            sigma_truth->matrix().selfadjointView<Eigen::Lower>() * diff;
        const double bsb =
            quadratic_form(sigma_truth->matrix(), b.weights(), b.weights());
        const double dd = diff.dot(sigma_diff);
        const double bd = b.weights().dot(sigma_diff);
        pt.finite_sample_loss =
            dd > 0.0 ? (bd * bd) / (dd * bsb) : 0.0;
      } catch (const Error&) {
        pt.finite_sample_loss = std::numeric_limits<double>::quiet_NaN();
      }
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace doubleshrink
