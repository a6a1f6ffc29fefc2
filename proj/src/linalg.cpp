#include "axecv/linalg.hpp"

#include <cmath>
#include <string>

#include "axecv/error.hpp"

namespace axecv {

MatrixXd ConditionalPosterior::smoother() const {
  return design * v * design.transpose() * row_precision.asDiagonal();
}

VectorXd ConditionalPosterior::coef() const {
  // Two refinement steps recover the accuracy lost to ill-conditioning when
  // the prior is nearly flat.
  const auto llt = cholesky(precision, "conditional posterior precision V^{-1}");
  VectorXd b = llt.solve(score);
  for (int step = 0; step < 2; ++step) b += llt.solve(score - precision * b);
  return b;
}

ConditionalPosterior conditional_posterior(const ModelSpec& spec, const VarianceEstimates& var) {
  var.validate();
  ConditionalPosterior cp;
  cp.tau = var.tau;
  cp.design = spec.design();
  cp.row_precision = noise_variance(spec, var.tau).cwiseInverse();

  const MatrixXd weighted = cp.row_precision.asDiagonal() * cp.design;
  cp.precision = cp.design.transpose() * weighted + prior_precision(spec, var.sigma);
  cp.v = spd_inverse(cp.precision, "conditional posterior precision V^{-1}");
  cp.score = weighted.transpose() * spec.response;
  return cp;
}

VectorXd conditional_posterior_mean(const ModelSpec& spec, const VarianceEstimates& var) {
  return conditional_posterior(spec, var).fitted();
}

MatrixXd rank_one_downdate(const MatrixXd& v, const VectorXd& x, double weight) {
  if (x.size() != v.rows()) fail(Errc::DimensionMismatch, "x_j length differs from V");
  if (weight == 0.0) return v;
  const VectorXd vx = v * x;
  const double denom = 1.0 - weight * x.dot(vx);
  if (!(denom > kSingularDowndateTol)) {
    fail(Errc::SingularDowndate,
         "1 - w x'Vx = " + std::to_string(denom) + "; removing the fold destroys identifiability");
  }
  MatrixXd out = v + (weight / denom) * vx * vx.transpose();
  return 0.5 * (out + out.transpose());
}

MatrixXd downdate_v(const MatrixXd& v, const VectorXd& x_j, Index n_j, double tau) {
  if (n_j < 0) fail(Errc::InvalidArgument, "n_j must be nonnegative");
  if (!(tau > 0.0)) fail(Errc::InvalidArgument, "tau must be positive");
  return rank_one_downdate(v, x_j, static_cast<double>(n_j) / (tau * tau));
}

MatrixXd block_downdate(const MatrixXd& v, const MatrixXd& x_j, const VectorXd& noise_j) {
  if (x_j.cols() != v.rows() || x_j.rows() != noise_j.size()) {
    fail(Errc::DimensionMismatch, "block downdate dimensions");
  }
  if (x_j.rows() == 0) return v;
  const MatrixXd vxt = v * x_j.transpose();
  MatrixXd s = -x_j * vxt;
  s.diagonal() += noise_j;
  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success ||
      llt.matrixLLT().diagonal().minCoeff() <= std::sqrt(kSingularDowndateTol) *
                                                   std::sqrt(noise_j.maxCoeff())) {
    fail(Errc::SingularDowndate, "P_j - X_j V X_j' is not positive definite");
  }
  MatrixXd out = v + vxt * llt.solve(vxt.transpose());
  return 0.5 * (out + out.transpose());
}

bool rows_identical(const MatrixXd& x, const IndexSet& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (x.row(rows[i]) != x.row(rows[0])) return false;
  }
  return true;
}

FoldStatistics fold_statistics(const ModelSpec& spec, const VarianceEstimates& var,
                               const IndexSet& fold) {
  if (fold.empty()) fail(Errc::EmptyFold, "fold statistics of an empty fold");
  ModelSpec homo = spec;
  homo.known_variance.reset();
  const auto cp = conditional_posterior(homo, var);
  if (!rows_identical(cp.design, fold)) {
    fail(Errc::HeterogeneousFoldRows, "fold rows differ; identical-row identities do not apply");
  }
  FoldStatistics st;
  st.n = static_cast<Index>(fold.size());
  st.x = cp.design.row(fold.front()).transpose();
  st.nu = st.x.dot(cp.v * st.x);
  st.ybar = select(spec.response, fold).mean();
  st.ytilde = st.x.dot(cp.coef());
  st.ebar = st.ybar - st.ytilde;
  return st;
}

ConditionalGaussian condition_on_rest(const MatrixXd& sigma, const IndexSet& held) {
  ConditionalGaussian cg;
  cg.held = held;
  cg.rest = complement(held, sigma.rows());
  const MatrixXd s_hh = select_block(sigma, held, held);
  if (cg.rest.empty()) {
    cg.coef = MatrixXd::Zero(static_cast<Index>(held.size()), 0);
    cg.cov = s_hh;
    return cg;
  }
  const MatrixXd s_hr = select_block(sigma, held, cg.rest);
  const auto llt = cholesky(select_block(sigma, cg.rest, cg.rest), "Sigma_{-j,-j}");
  cg.coef = llt.solve(s_hr.transpose()).transpose();
  cg.cov = s_hh - cg.coef * s_hr.transpose();
  cg.cov = 0.5 * (cg.cov + cg.cov.transpose());
  return cg;
}

IndexSet held_out_columns(const ModelSpec& spec, const IndexSet& fold) {
  std::vector<char> in_fold(static_cast<std::size_t>(spec.n()), 0);
  for (Index r : fold) in_fold[static_cast<std::size_t>(r)] = 1;
  IndexSet held;
  for (Index c = 0; c < spec.p2(); ++c) {
    bool used_in_test = false;
    bool used_in_train = false;
    for (Index r = 0; r < spec.n(); ++r) {
      if (spec.x2(r, c) == 0.0) continue;
      (in_fold[static_cast<std::size_t>(r)] ? used_in_test : used_in_train) = true;
    }
    if (used_in_test && !used_in_train) held.push_back(c);
  }
  return held;
}

}  // namespace axecv
