#pragma once

// Marginal log-likelihood of the variance parameters with beta integrated
// out, for Sigma = sigma2 * R (R the model's covariance structure):
//
//   l(sigma2, tau2) = -N log tau - 1/2 log det Sigma + 1/2 log det V
//                     - Y'Y / (2 tau^2) + Y'X V X'Y / (2 tau^4)
//
// up to a constant. Used to check how far the drop-one-fold maximizer moves
// from the full-data one.

#include <functional>

#include "axecv/dense.hpp"
#include "axecv/model.hpp"

namespace axecv {

class VarianceLikelihood {
 public:
  /// Likelihood of the rows not in `drop`. Requires a Gaussian model without
  /// known variances.
  explicit VarianceLikelihood(const ModelSpec& spec, const IndexSet& drop = {});

  double operator()(double sigma2, double tau2) const;

  Index n() const { return n_; }

 private:
  Index n_ = 0;
  Index p1_ = 0;
  Index p2_ = 0;
  MatrixXd gram_;
  VectorXd xty_;
  double yty_ = 0.0;
  MatrixXd fixed_prec_;
  MatrixXd structure_prec_;
  double structure_log_det_ = 0.0;
};

struct NelderMeadOptions {
  double step = 1.0;
  double tol = 1e-10;
  int max_iter = 5000;
};

struct NelderMeadResult {
  VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes f starting from a simplex of `step` offsets around x0.
NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& x0,
                             const NelderMeadOptions& opts = {});

struct VarianceMode {
  double sigma2 = 0.0;
  double tau2 = 0.0;
  double log_lik = 0.0;
  bool converged = false;
};

/// Maximizes over (log sigma2, log tau2) with log sigma2 floored at
/// log(sigma2_floor).
VarianceMode maximize_variance_likelihood(const VarianceLikelihood& lik, double sigma2_start,
                                          double tau2_start, double sigma2_floor = 1e-8);

}  // namespace axecv
