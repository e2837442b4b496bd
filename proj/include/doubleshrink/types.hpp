#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace doubleshrink {

// Error hierarchy. Input errors (InvalidData, InvalidParameter) are raised
// before any numerics run; the remaining types signal numerical failure
// modes of an otherwise well-posed problem. The CLI maps the former to exit
// code 2 and the latter to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidData : Error {
  using Error::Error;
};
struct InvalidParameter : Error {
  using Error::Error;
};
struct SingularCovariance : Error {
  using Error::Error;
};
struct DegenerateSolution : Error {
  using Error::Error;
};
struct KernelDegenerate : Error {
  using Error::Error;
};
struct LossDegenerate : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct OptimizationFailure : Error {
  using Error::Error;
};

/// A p x n panel of asset returns: rows are assets, columns are time.
/// Requires p >= 2 and n >= 3 (centering consumes one degree of freedom)
/// and rejects non-finite entries. Labels default to synthetic indices.
class ReturnPanel {
 public:
  ReturnPanel(Eigen::MatrixXd values, std::vector<std::string> asset_labels = {},
              std::vector<std::string> time_labels = {})
      : values_(std::move(values)),
        asset_labels_(std::move(asset_labels)),
        time_labels_(std::move(time_labels)) {
    const auto p = values_.rows();
    const auto n = values_.cols();
    if (p < 2) throw InvalidData("ReturnPanel: need at least 2 assets, got " + std::to_string(p));
    if (n < 3) throw InvalidData("ReturnPanel: need at least 3 periods, got " + std::to_string(n));
    if (!values_.allFinite()) throw InvalidData("ReturnPanel: non-finite entry in return matrix");
    if (asset_labels_.empty()) {
      asset_labels_.reserve(static_cast<std::size_t>(p));
      for (Eigen::Index i = 0; i < p; ++i) asset_labels_.push_back("a" + std::to_string(i + 1));
    }
    if (time_labels_.empty()) {
      time_labels_.reserve(static_cast<std::size_t>(n));
      for (Eigen::Index t = 0; t < n; ++t) time_labels_.push_back("t" + std::to_string(t + 1));
    }
    if (static_cast<Eigen::Index>(asset_labels_.size()) != p)
      throw InvalidData("ReturnPanel: asset label count does not match row count");
    if (static_cast<Eigen::Index>(time_labels_.size()) != n)
      throw InvalidData("ReturnPanel: time label count does not match column count");
  }

  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<std::string>& asset_labels() const { return asset_labels_; }
  const std::vector<std::string>& time_labels() const { return time_labels_; }

  Eigen::Index assets() const { return values_.rows(); }
  Eigen::Index periods() const { return values_.cols(); }
  /// Concentration ratio c = p/n.
  double concentration() const {
    return static_cast<double>(values_.rows()) / static_cast<double>(values_.cols());
  }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> asset_labels_;
  std::vector<std::string> time_labels_;
};

enum class CovKind { Sample, Ridge, True };

/// A symmetric p x p covariance matrix tagged with its provenance.
/// Ridge matrices carry the blend weight lambda of lambda*S + (1-lambda)*I.
class CovarianceEstimate {
 public:
  CovarianceEstimate(Eigen::MatrixXd matrix, CovKind kind, double lambda = 1.0)
      : matrix_(std::move(matrix)), kind_(kind), lambda_(lambda) {
    if (matrix_.rows() != matrix_.cols())
      throw InvalidData("CovarianceEstimate: matrix is not square");
    if (matrix_.rows() < 1) throw InvalidData("CovarianceEstimate: empty matrix");
    if (!matrix_.allFinite()) throw InvalidData("CovarianceEstimate: non-finite entry");
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
      throw InvalidData("CovarianceEstimate: matrix is not symmetric (max asymmetry " +
                        std::to_string(asym) + ")");
  }

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  CovKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  Eigen::Index dim() const { return matrix_.rows(); }

 private:
  Eigen::MatrixXd matrix_;
  CovKind kind_;
  double lambda_;
};

/// Fully-invested portfolio weights (entries sum to one). The tolerance is
/// scaled by the L1 mass so that near-singular GMV solutions with large
/// offsetting positions are not rejected for pure round-off reasons.
class PortfolioWeights {
 public:
  explicit PortfolioWeights(Eigen::VectorXd weights, std::string label = "")
      : weights_(std::move(weights)), label_(std::move(label)) {
    if (weights_.size() < 1) throw InvalidData("PortfolioWeights: empty vector");
    if (!weights_.allFinite()) throw InvalidData("PortfolioWeights: non-finite weight");
    const double sum = weights_.sum();
    const double scale = std::max(1.0, weights_.cwiseAbs().sum());
    if (std::abs(sum - 1.0) > 1e-10 * scale)
      throw InvalidData("PortfolioWeights: weights sum to " + std::to_string(sum) +
                        ", expected 1");
  }

  const Eigen::VectorXd& weights() const { return weights_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  Eigen::Index size() const { return weights_.size(); }

 private:
  Eigen::VectorXd weights_;
  std::string label_;
};

}  // namespace doubleshrink
