#pragma once

// Pareto-smoothed importance weights.
//
// The largest M = ceil(f S) raw weights are replaced by quantiles of a
// generalized Pareto fitted to their exceedances over the (M+1)-th largest
// weight, evaluated at plotting positions (r - 0.5) / M and capped at the
// largest raw weight. The shape fit is the Zhang-Stephens estimator:
//
//   x_(1) <= ... <= x_(n) exceedances, m = 30 + floor(sqrt(n))
//   theta_j = 1/x_(n) + (1 - sqrt(m / (j - 1/2))) / (3 x_(q)),  q = floor(n/4 + 1/2)
//   l(theta) = n (log(-theta / k(theta)) - k(theta) - 1),  k(theta) = mean log(1 - theta x)
//   theta_hat = sum_j theta_j w_j,  w_j = exp(l_j) / sum exp(l)
//   k = mean log(1 - theta_hat x),  sigma = -k / theta_hat
//
// and k is shrunk toward 0.5 as (n k + 5) / (n + 10).

#include "axecv/dense.hpp"

namespace axecv {

struct ImportanceWeights {
  VectorXd log_w;
  VectorXd normalized;
  double khat = 0.0;
  bool smoothed = false;
};

struct GpdFit {
  double k = 0.0;
  double sigma = 0.0;
};

/// `exceedances` must be positive; returns the adjusted shape.
GpdFit gpd_fit(VectorXd exceedances);

/// Quantile function of GPD(k, sigma) at probability p.
double gpd_quantile(double p, double k, double sigma);

/// Requires S >= 5. A flat tail returns the raw normalized weights with
/// smoothed = false and khat = 0.
ImportanceWeights psis_smooth(const VectorXd& log_w, double tail_fraction = 0.2);

/// Normalized weights without smoothing.
ImportanceWeights raw_weights(const VectorXd& log_w);

/// 1 / sum w^2 for normalized w.
double effective_sample_size(const VectorXd& normalized);

}  // namespace axecv
