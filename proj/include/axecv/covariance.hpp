#pragma once

// Generators for the random-effect covariance Sigma.
//
//   diagonal : sigma2 * I
//   car      : sigma2 * (diag(W 1) - alpha W)^{-1}                 (proper CAR)
//   st_car   : sigma2 * [(I - rho H)' blockdiag(Q) (I - rho H)]^{-1}
//              Q = alpha (diag(W 1) - W) + (1 - alpha) I           (Leroux precision)
//              H shifts period t-1 onto period t (identity blocks on the
//              first block subdiagonal), so s_t | s_{t-1} ~ N(rho s_{t-1}, sigma2 Q^{-1}).
//
// W is a symmetric, hollow 0/1 adjacency with at least one neighbour per node.

#include "axecv/dense.hpp"

namespace axecv {

enum class CovKind { diagonal, car, st_car };

struct CovarianceStructure {
  CovKind kind = CovKind::diagonal;
  double sigma2 = 1.0;
  double alpha = 0.0;
  double rho = 0.0;
  MatrixXd adjacency;
  int periods = 1;
  Index diagonal_dim = 0;

  static CovarianceStructure diagonal(Index dim, double sigma2);
  static CovarianceStructure car(MatrixXd adjacency, double alpha, double sigma2);
  static CovarianceStructure st_car(MatrixXd adjacency, double alpha, double rho,
                                    double sigma2, int periods);

  Index dim() const;

  /// Sigma at this structure's sigma2.
  MatrixXd sigma() const;

  /// Sigma / sigma2 and its closed-form inverse.
  MatrixXd structure() const;
  MatrixXd structure_precision() const;

  CovarianceStructure with_sigma2(double s2) const;

  /// Throws on any violated parameter or adjacency invariant.
  void validate() const;
};

void validate_adjacency(const MatrixXd& w);

MatrixXd diagonal_sigma(double sigma2, Index dim);
MatrixXd car_sigma(const MatrixXd& w, double alpha, double sigma2);
MatrixXd st_car_sigma(const MatrixXd& w, double alpha, double rho, double sigma2, int periods);

MatrixXd car_precision(const MatrixXd& w, double alpha);
MatrixXd leroux_precision(const MatrixXd& w, double alpha);
MatrixXd st_car_precision(const MatrixXd& w, double alpha, double rho, int periods);

/// Ring graph on `nodes` vertices, each joined to its `reach` nearest
/// neighbours on either side.
MatrixXd ring_lattice(Index nodes, int reach = 1);

}  // namespace axecv
