#include "axecv/covariance.hpp"

#include <cmath>
#include <string>

#include "axecv/error.hpp"

namespace axecv {

namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    fail(Errc::InvalidArgument, "alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
}

void require_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    fail(Errc::InvalidArgument, "sigma2 must be positive, got " + std::to_string(sigma2));
  }
}

MatrixXd symmetrized(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

void validate_adjacency(const MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    fail(Errc::DimensionMismatch, "adjacency must be a non-empty square matrix");
  }
  for (Index i = 0; i < w.rows(); ++i) {
    if (w(i, i) != 0.0) fail(Errc::InvalidArgument, "adjacency diagonal must be zero");
    double neighbours = 0.0;
    for (Index j = 0; j < w.cols(); ++j) {
      const double v = w(i, j);
      if (v != 0.0 && v != 1.0) fail(Errc::InvalidArgument, "adjacency must be binary");
      if (v != w(j, i)) fail(Errc::InvalidArgument, "adjacency must be symmetric");
      neighbours += v;
    }
    if (neighbours == 0.0) {
      fail(Errc::InvalidArgument, "node " + std::to_string(i + 1) + " has no neighbours");
    }
  }
}

MatrixXd diagonal_sigma(double sigma2, Index dim) {
  require_sigma2(sigma2);
  if (dim < 0) fail(Errc::InvalidArgument, "negative dimension");
  return sigma2 * MatrixXd::Identity(dim, dim);
}

MatrixXd car_precision(const MatrixXd& w, double alpha) {
  validate_adjacency(w);
  require_alpha(alpha);
  MatrixXd q = -alpha * w;
  q.diagonal() += w.rowwise().sum();
  return q;
}

MatrixXd leroux_precision(const MatrixXd& w, double alpha) {
  validate_adjacency(w);
  require_alpha(alpha);
  MatrixXd q = -alpha * w;
  q.diagonal() += alpha * w.rowwise().sum();
  q.diagonal().array() += 1.0 - alpha;
  return q;
}

MatrixXd st_car_precision(const MatrixXd& w, double alpha, double rho, int periods) {
  if (periods < 1) fail(Errc::InvalidArgument, "periods must be >= 1");
  if (!(std::abs(rho) < 1.0)) fail(Errc::InvalidArgument, "rho must lie in (-1, 1)");
  const MatrixXd q = leroux_precision(w, alpha);
  const Index j = q.rows();
  const Index n = j * periods;

  MatrixXd block_q = MatrixXd::Zero(n, n);
  for (int t = 0; t < periods; ++t) block_q.block(t * j, t * j, j, j) = q;

  MatrixXd shift = MatrixXd::Zero(n, n);
  if (periods > 1) shift.bottomLeftCorner(n - j, n - j).setIdentity();

  const MatrixXd a = MatrixXd::Identity(n, n) - rho * shift;
  return symmetrized(a.transpose() * block_q * a);
}

MatrixXd car_sigma(const MatrixXd& w, double alpha, double sigma2) {
  require_sigma2(sigma2);
  return sigma2 * spd_inverse(car_precision(w, alpha), "CAR precision");
}

MatrixXd st_car_sigma(const MatrixXd& w, double alpha, double rho, double sigma2, int periods) {
  require_sigma2(sigma2);
  return sigma2 * spd_inverse(st_car_precision(w, alpha, rho, periods),
                              "spatio-temporal CAR precision");
}

MatrixXd ring_lattice(Index nodes, int reach) {
  if (nodes < 3) fail(Errc::InvalidArgument, "ring lattice needs at least 3 nodes");
  if (reach < 1 || 2 * reach >= nodes) fail(Errc::InvalidArgument, "bad ring reach");
  MatrixXd w = MatrixXd::Zero(nodes, nodes);
  for (Index i = 0; i < nodes; ++i) {
    for (int d = 1; d <= reach; ++d) {
      const Index k = (i + d) % nodes;
      w(i, k) = 1.0;
      w(k, i) = 1.0;
    }
  }
  return w;
}

CovarianceStructure CovarianceStructure::diagonal(Index dim, double sigma2) {
  CovarianceStructure c;
  c.kind = CovKind::diagonal;
  c.diagonal_dim = dim;
  c.sigma2 = sigma2;
  c.validate();
  return c;
}

CovarianceStructure CovarianceStructure::car(MatrixXd adjacency, double alpha, double sigma2) {
  CovarianceStructure c;
  c.kind = CovKind::car;
  c.adjacency = std::move(adjacency);
  c.alpha = alpha;
  c.sigma2 = sigma2;
  c.validate();
  return c;
}

CovarianceStructure CovarianceStructure::st_car(MatrixXd adjacency, double alpha, double rho,
                                                double sigma2, int periods) {
  CovarianceStructure c;
  c.kind = CovKind::st_car;
  c.adjacency = std::move(adjacency);
  c.alpha = alpha;
  c.rho = rho;
  c.sigma2 = sigma2;
  c.periods = periods;
  c.validate();
  return c;
}

Index CovarianceStructure::dim() const {
  switch (kind) {
    case CovKind::diagonal: return diagonal_dim;
    case CovKind::car: return adjacency.rows();
    case CovKind::st_car: return adjacency.rows() * periods;
  }
  return 0;
}

void CovarianceStructure::validate() const {
  require_sigma2(sigma2);
  switch (kind) {
    case CovKind::diagonal:
      if (diagonal_dim < 0) fail(Errc::InvalidArgument, "negative dimension");
      break;
    case CovKind::car:
      validate_adjacency(adjacency);
      require_alpha(alpha);
      break;
    case CovKind::st_car:
      validate_adjacency(adjacency);
      require_alpha(alpha);
      if (!(std::abs(rho) < 1.0)) fail(Errc::InvalidArgument, "rho must lie in (-1, 1)");
      if (periods < 1) fail(Errc::InvalidArgument, "periods must be >= 1");
      break;
  }
}

MatrixXd CovarianceStructure::structure_precision() const {
  switch (kind) {
    case CovKind::diagonal: return MatrixXd::Identity(diagonal_dim, diagonal_dim);
    case CovKind::car: return car_precision(adjacency, alpha);
    case CovKind::st_car: return st_car_precision(adjacency, alpha, rho, periods);
  }
  return {};
}

MatrixXd CovarianceStructure::structure() const {
  if (kind == CovKind::diagonal) return MatrixXd::Identity(diagonal_dim, diagonal_dim);
  return spd_inverse(structure_precision(), "covariance structure precision");
}

MatrixXd CovarianceStructure::sigma() const {
  switch (kind) {
    case CovKind::diagonal: return diagonal_sigma(sigma2, diagonal_dim);
    case CovKind::car: return car_sigma(adjacency, alpha, sigma2);
    case CovKind::st_car: return st_car_sigma(adjacency, alpha, rho, sigma2, periods);
  }
  return {};
}

CovarianceStructure CovarianceStructure::with_sigma2(double s2) const {
  require_sigma2(s2);
  CovarianceStructure c = *this;
  c.sigma2 = s2;
  return c;
}

}  // namespace axecv
