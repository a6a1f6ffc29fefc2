#pragma once

#include <cstdint>
#include <random>

#include "axecv/dense.hpp"

namespace axecv {

using Rng = std::mt19937_64;

VectorXd standard_normal(Rng& rng, Index n);

/// Inverse-gamma with density proportional to x^{-shape-1} exp(-scale / x).
double inverse_gamma(Rng& rng, double shape, double scale);

/// Inverse-Wishart with `df` degrees of freedom and scale matrix `scale`
/// (mean scale / (df - p - 1)), drawn by inverting a Bartlett-decomposed
/// Wishart(df, scale^{-1}).
MatrixXd inverse_wishart(Rng& rng, double df, const MatrixXd& scale);

/// Draws from N(mean, cov) given the lower Cholesky factor of cov.
VectorXd mvnormal_from_factor(Rng& rng, const VectorXd& mean, const MatrixXd& lower);

}  // namespace axecv
