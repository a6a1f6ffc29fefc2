#pragma once

// Small dense helpers shared across modules. All SPD work goes through
// Cholesky so loss of definiteness surfaces as NotPositiveDefinite.

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace axecv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sorted, duplicate-free row (or column) indices, 0-based.
using IndexSet = std::vector<Index>;

Eigen::LLT<MatrixXd> cholesky(const MatrixXd& a, std::string_view what);

MatrixXd spd_inverse(const MatrixXd& a, std::string_view what);

double log_det(const Eigen::LLT<MatrixXd>& llt);

bool is_symmetric(const MatrixXd& a, double tol = 1e-12);

MatrixXd select_rows(const MatrixXd& a, const IndexSet& rows);
MatrixXd select_block(const MatrixXd& a, const IndexSet& rows, const IndexSet& cols);
VectorXd select(const VectorXd& v, const IndexSet& idx);

/// {0..n-1} minus `idx`. `idx` must be sorted.
IndexSet complement(const IndexSet& idx, Index n);

/// Multivariate normal log density with covariance given by its Cholesky factor.
double normal_log_density(const VectorXd& x, const VectorXd& mean,
                          const Eigen::LLT<MatrixXd>& cov_llt);

}  // namespace axecv
