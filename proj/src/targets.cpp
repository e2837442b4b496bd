#include "doubleshrink/targets.hpp"

#include <algorithm>
#include <cmath>

#include "doubleshrink/core.hpp"
#include "doubleshrink/estimator.hpp"

namespace doubleshrink {

PortfolioWeights equally_weighted(Eigen::Index p) {
  if (p < 2) throw InvalidParameter("equally_weighted: need p >= 2");
  return PortfolioWeights(Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p)), "ew");
}

PortfolioWeights equal_correlation_target(const CovarianceEstimate& s) {
  const Eigen::Index p = s.dim();
  const Eigen::VectorXd variances = s.matrix().diagonal();
  if (!(variances.minCoeff() > 0.0))
    throw InvalidData("equal_correlation_target: nonpositive diagonal variance");
  const Eigen::VectorXd vol = variances.cwiseSqrt();

  double rho_sum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j)
      rho_sum += s.matrix()(i, j) / (vol[i] * vol[j]);
  double rho = rho_sum / (0.5 * static_cast<double>(p) * static_cast<double>(p - 1));

  // Clip into the open interval where the equicorrelation matrix is PD.
  constexpr double kMargin = 1e-6;
  const double lo = -1.0 / static_cast<double>(p - 1) + kMargin;
  rho = std::clamp(rho, lo, 1.0 - kMargin);

  // Sigma_ec = D^{1/2} R D^{1/2}, R = (1-rho)I + rho 11'. The inverse of R
  // is closed form, so Sigma_ec^{-1} 1 needs no factorization.
  const Eigen::VectorXd inv_vol = vol.cwiseInverse();
  const double kappa = rho / (1.0 + rho * static_cast<double>(p - 1));
  const double inv_vol_sum = inv_vol.sum();
  Eigen::VectorXd x(p);
  for (Eigen::Index i = 0; i < p; ++i)
    x[i] = inv_vol[i] * (inv_vol[i] - kappa * inv_vol_sum);
  const double denom = x.sum();
  if (std::abs(denom) < 1e-14 * std::max(1.0, x.cwiseAbs().sum()))
    throw DegenerateSolution("equal_correlation_target: degenerate normalization");
  return PortfolioWeights(x / denom, "ec");
}

PortfolioWeights resolve_target(const TargetSpec& spec, const CovarianceEstimate& s) {
  switch (spec.kind) {
    case TargetSpec::Kind::EquallyWeighted:
      return equally_weighted(s.dim());
    case TargetSpec::Kind::EqualCorrelation:
      return equal_correlation_target(s);
    case TargetSpec::Kind::Custom: {
      if (spec.custom.size() != s.dim())
        throw InvalidData("resolve_target: custom target dimension mismatch");
      return PortfolioWeights(spec.custom, "custom");
    }
  }
  throw InvalidParameter("resolve_target: unknown target kind");
}

BenchmarkSuite benchmark_suite(const ReturnPanel& panel, const PortfolioWeights& b) {
  const CovarianceEstimate s = sample_covariance(panel);
  const double c = panel.concentration();
  BenchmarkSuite suite;
  suite.strategies.emplace_back("traditional", traditional_gmv(s));
  PortfolioWeights target = b;
  target.set_label("target");
  suite.strategies.emplace_back("target", std::move(target));
  ShrinkageSolution fit = optimize_lambda(s, b, c);
  suite.strategies.emplace_back("double", fit.final_weights);
  if (c < 1.0) {
    ShrinkageSolution corner = solve_at_lambda(s, b, c, 1.0);
    PortfolioWeights bps = corner.final_weights;
    bps.set_label("bps");
    suite.strategies.emplace_back("bps", std::move(bps));
  } else {
    suite.notes.push_back("bps omitted: weight-only shrinkage needs c < 1");
  }
  return suite;
}

}  // namespace doubleshrink
