#pragma once

// Hierarchical regression model representation shared by every estimator:
//
//   Y | beta, tau ~ N(X1 beta1 + X2 beta2, tau^2 I)
//   beta1 ~ N(0, C),  beta2 | Sigma ~ N(0, Sigma)
//
// Row indices are 0-based throughout the library.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "axecv/covariance.hpp"
#include "axecv/dense.hpp"

namespace axecv {

enum class Family { gaussian, poisson_log };
enum class FoldScheme { loo, lco, kfold };
enum class PlugInSource { posterior_mean, map, external };

std::string_view to_string(Family f) noexcept;
std::string_view to_string(FoldScheme s) noexcept;
std::string_view to_string(PlugInSource s) noexcept;
FoldScheme parse_fold_scheme(std::string_view s);

struct ModelSpec {
  MatrixXd x1;
  MatrixXd x2;
  /// Fixed-effect prior covariance C. Ignored when `prior_infinite` is set,
  /// in which case the fixed-effect prior precision is exactly zero.
  MatrixXd prior_cov;
  bool prior_infinite = false;
  CovarianceStructure cov;
  Family family = Family::gaussian;
  /// Exposure E on the natural scale; treated as all ones when absent.
  std::optional<VectorXd> offset;
  /// Known per-observation variances. When present they replace tau^2 I.
  std::optional<VectorXd> known_variance;
  VectorXd response;

  Index n() const { return response.size(); }
  Index p1() const { return x1.cols(); }
  Index p2() const { return x2.cols(); }
  Index p() const { return x1.cols() + x2.cols(); }

  /// [X1 X2]
  MatrixXd design() const;

  /// Copy restricted to `rows` (all columns kept).
  ModelSpec subset(const IndexSet& rows) const;
};

struct VarianceEstimates {
  MatrixXd sigma;
  double tau = 1.0;
  PlugInSource source = PlugInSource::external;

  void validate() const;
};

struct FoldPlan {
  std::vector<IndexSet> folds;
  FoldScheme scheme = FoldScheme::loo;
  std::optional<std::vector<long long>> cluster_labels;

  std::size_t size() const { return folds.size(); }
};

/// Diagonal of the observation covariance: known variances, else tau^2.
VectorXd noise_variance(const ModelSpec& spec, double tau);

/// blockdiag(C^{-1} or 0, Sigma^{-1}).
MatrixXd prior_precision(const ModelSpec& spec, const MatrixXd& sigma);

void validate_model(const ModelSpec& spec);

FoldPlan build_fold_plan(FoldScheme scheme, Index n,
                         const std::optional<std::vector<long long>>& labels = std::nullopt,
                         std::optional<int> k = std::nullopt, std::uint64_t seed = 0);

void validate_fold_plan(const FoldPlan& plan, Index n);

}  // namespace axecv
