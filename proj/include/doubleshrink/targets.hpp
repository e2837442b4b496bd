#pragma once

#include <string>
#include <utility>
#include <vector>

#include "doubleshrink/types.hpp"

namespace doubleshrink {

/// Target portfolio selector. Custom vectors must already sum to one; they
/// are rejected, not renormalized.
struct TargetSpec {
  enum class Kind { EquallyWeighted, EqualCorrelation, Custom };
  Kind kind = Kind::EquallyWeighted;
  Eigen::VectorXd custom;

  static TargetSpec equally_weighted() { return {Kind::EquallyWeighted, {}}; }
  static TargetSpec equal_correlation() { return {Kind::EqualCorrelation, {}}; }
  static TargetSpec custom_vector(Eigen::VectorXd w) { return {Kind::Custom, std::move(w)}; }
};

/// The naive 1/p portfolio.
PortfolioWeights equally_weighted(Eigen::Index p);

/// GMV weights of the constant-correlation covariance implied by S: common
/// correlation rho = mean off-diagonal sample correlation (clipped into the
/// positive definite range), variances from diag(S). Uses the closed-form
/// equicorrelation inverse; rho = 0 reduces to inverse-variance weights.
PortfolioWeights equal_correlation_target(const CovarianceEstimate& s);

PortfolioWeights resolve_target(const TargetSpec& spec, const CovarianceEstimate& s);

/// Benchmark strategy weights fitted on one panel: Traditional (pseudo-
/// inverse GMV), the target itself, the double-shrinkage pipeline, and the
/// weight-only shrinkage corner (lambda = 1, available only for c < 1).
struct BenchmarkSuite {
  std::vector<std::pair<std::string, PortfolioWeights>> strategies;
  std::vector<std::string> notes;
};

BenchmarkSuite benchmark_suite(const ReturnPanel& panel, const PortfolioWeights& b);

}  // namespace doubleshrink
