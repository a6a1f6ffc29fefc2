#pragma once

// Conditional posterior of the regression coefficients given the variance
// parameters, and the downdates that remove a test fold from it.
//
//   V = (X' P^{-1} X + blockdiag(C^{-1}, Sigma^{-1}))^{-1},  P = tau^2 I
//   E[X beta | Sigma, tau, Y] = X V X' P^{-1} Y
//
// Removing fold j whose rows all equal x_j' (n_j of them) is a rank-one
// downdate of V^{-1}:
//
//   V_{-j} = V + w / (1 - w x_j' V x_j) * V x_j x_j' V,   w = n_j / tau^2
//
// Folds with heterogeneous rows use the block (Woodbury) form
//
//   V_{-j} = V + V X_j' (P_j - X_j V X_j')^{-1} X_j V.

#include "axecv/dense.hpp"
#include "axecv/model.hpp"

namespace axecv {

struct ConditionalPosterior {
  MatrixXd v;
  MatrixXd design;
  /// Diagonal of P^{-1}.
  VectorXd row_precision;
  /// X' P^{-1} Y
  VectorXd score;
  /// V^{-1}
  MatrixXd precision;
  double tau = 1.0;

  /// V X' P^{-1} Y by Cholesky solve with iterative refinement.
  VectorXd coef() const;
  VectorXd fitted() const { return design * coef(); }
  /// X V X' P^{-1}; with P = tau^2 I this is tau^{-2} X V X'.
  MatrixXd smoother() const;
};

ConditionalPosterior conditional_posterior(const ModelSpec& spec, const VarianceEstimates& var);

VectorXd conditional_posterior_mean(const ModelSpec& spec, const VarianceEstimates& var);

/// Denominator guard for the rank-one downdate.
inline constexpr double kSingularDowndateTol = 1e-12;

MatrixXd downdate_v(const MatrixXd& v, const VectorXd& x_j, Index n_j, double tau);

/// (V^{-1} - weight x x')^{-1} via Sherman-Morrison.
MatrixXd rank_one_downdate(const MatrixXd& v, const VectorXd& x, double weight);

/// (V^{-1} - X_j' diag(noise_j)^{-1} X_j)^{-1} via Woodbury.
MatrixXd block_downdate(const MatrixXd& v, const MatrixXd& x_j, const VectorXd& noise_j);

struct FoldStatistics {
  Index n = 0;
  VectorXd x;         // the shared design row x_j
  double nu = 0.0;    // x_j' V x_j
  double ybar = 0.0;  // mean test response
  double ytilde = 0.0;  // x_j' V X'Y / tau^2, the full-data fitted mean at x_j
  double ebar = 0.0;  // ybar - ytilde
};

bool rows_identical(const MatrixXd& x, const IndexSet& rows);

/// Requires every design row in `fold` to be identical; uses tau (not known
/// variances).
FoldStatistics fold_statistics(const ModelSpec& spec, const VarianceEstimates& var,
                               const IndexSet& fold);

/// theta_h | theta_rest ~ N(coef * theta_rest, cov) for theta ~ N(0, sigma),
/// where `held` indexes theta_h and rest is its complement.
struct ConditionalGaussian {
  IndexSet held;
  IndexSet rest;
  MatrixXd coef;  // Sigma_{h,-h} Sigma_{-h,-h}^{-1}
  MatrixXd cov;   // Schur complement
};

ConditionalGaussian condition_on_rest(const MatrixXd& sigma, const IndexSet& held);

/// Random-effect columns (indices into X2) that are zero on every training
/// row but used by some test row: effects the training data cannot inform.
IndexSet held_out_columns(const ModelSpec& spec, const IndexSet& fold);

}  // namespace axecv
