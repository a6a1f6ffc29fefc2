#include "axecv/random.hpp"

#include <cmath>

#include "axecv/error.hpp"

namespace axecv {

VectorXd standard_normal(Rng& rng, Index n) {
  std::normal_distribution<double> z(0.0, 1.0);
  VectorXd out(n);
  for (Index i = 0; i < n; ++i) out(i) = z(rng);
  return out;
}

double inverse_gamma(Rng& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    fail(Errc::BadPriors, "inverse-gamma needs positive shape and scale");
  }
  std::gamma_distribution<double> g(shape, 1.0 / scale);
  return 1.0 / g(rng);
}

MatrixXd inverse_wishart(Rng& rng, double df, const MatrixXd& scale) {
  const Index p = scale.rows();
  if (!(df > static_cast<double>(p) - 1.0)) fail(Errc::BadPriors, "inverse-Wishart df <= p - 1");
  const MatrixXd scale_inv = spd_inverse(scale, "inverse-Wishart scale");
  const MatrixXd l = cholesky(scale_inv, "inverse-Wishart scale inverse").matrixL();

  std::normal_distribution<double> z(0.0, 1.0);
  MatrixXd a = MatrixXd::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(df - static_cast<double>(i));
    a(i, i) = std::sqrt(chi2(rng));
    for (Index j = 0; j < i; ++j) a(i, j) = z(rng);
  }
  const MatrixXd la = l * a;
  const MatrixXd wishart = la * la.transpose();
  return spd_inverse(wishart, "Wishart draw");
}

VectorXd mvnormal_from_factor(Rng& rng, const VectorXd& mean, const MatrixXd& lower) {
  return mean + lower * standard_normal(rng, mean.size());
}

}  // namespace axecv
