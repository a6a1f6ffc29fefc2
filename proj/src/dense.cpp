#include "axecv/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "axecv/error.hpp"

namespace axecv {

Eigen::LLT<MatrixXd> cholesky(const MatrixXd& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    fail(Errc::DimensionMismatch, std::string(what) + " is not square");
  }
  if (!a.allFinite()) {
    fail(Errc::NotPositiveDefinite, std::string(what) + " has non-finite entries");
  }
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    fail(Errc::NotPositiveDefinite, std::string(what) + " failed Cholesky");
  }
  const auto diag = llt.matrixLLT().diagonal();
  if (a.rows() > 0 && (diag.minCoeff() <= 0.0 || !diag.allFinite())) {
    fail(Errc::NotPositiveDefinite, std::string(what) + " failed Cholesky");
  }
  return llt;
}

MatrixXd spd_inverse(const MatrixXd& a, std::string_view what) {
  const auto llt = cholesky(a, what);
  MatrixXd inv = llt.solve(MatrixXd::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

double log_det(const Eigen::LLT<MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

bool is_symmetric(const MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

MatrixXd select_rows(const MatrixXd& a, const IndexSet& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = a.row(rows[i]);
  return out;
}

MatrixXd select_block(const MatrixXd& a, const IndexSet& rows, const IndexSet& cols) {
  MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Index>(i), static_cast<Index>(j)) = a(rows[i], cols[j]);
    }
  }
  return out;
}

VectorXd select(const VectorXd& v, const IndexSet& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

IndexSet complement(const IndexSet& idx, Index n) {
  IndexSet out;
  out.reserve(static_cast<std::size_t>(std::max<Index>(0, n - static_cast<Index>(idx.size()))));
  auto it = idx.begin();
  for (Index i = 0; i < n; ++i) {
    if (it != idx.end() && *it == i) {
      ++it;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

double normal_log_density(const VectorXd& x, const VectorXd& mean,
                          const Eigen::LLT<MatrixXd>& cov_llt) {
  const VectorXd z = cov_llt.matrixL().solve(x - mean);
  const double k = static_cast<double>(x.size());
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det(cov_llt) + z.squaredNorm());
}

}  // namespace axecv
