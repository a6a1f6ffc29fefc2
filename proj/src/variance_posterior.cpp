#include "axecv/variance_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "axecv/error.hpp"

namespace axecv {

VarianceLikelihood::VarianceLikelihood(const ModelSpec& spec, const IndexSet& drop) {
  if (spec.family != Family::gaussian) fail(Errc::InvalidArgument, "variance likelihood needs a Gaussian model");
  if (spec.known_variance) fail(Errc::InvalidArgument, "variance likelihood assumes tau^2 I noise");
  const IndexSet keep = complement(drop, spec.n());
  const MatrixXd x = select_rows(spec.design(), keep);
  const VectorXd y = select(spec.response, keep);
  n_ = static_cast<Index>(keep.size());
  p1_ = spec.p1();
  p2_ = spec.p2();
  gram_ = x.transpose() * x;
  xty_ = x.transpose() * y;
  yty_ = y.squaredNorm();
  fixed_prec_ = MatrixXd::Zero(p1_, p1_);
  if (!spec.prior_infinite && p1_ > 0) fixed_prec_ = spd_inverse(spec.prior_cov, "fixed-effect prior C");
  const MatrixXd r = spec.cov.structure();
  structure_prec_ = spd_inverse(r, "Sigma structure");
  structure_log_det_ = log_det(cholesky(r, "Sigma structure"));
}

double VarianceLikelihood::operator()(double sigma2, double tau2) const {
  if (!(sigma2 > 0.0) || !(tau2 > 0.0)) fail(Errc::InvalidArgument, "variances must be positive");
  MatrixXd precision = gram_ / tau2;
  if (p1_ > 0) precision.topLeftCorner(p1_, p1_) += fixed_prec_;
  if (p2_ > 0) precision.bottomRightCorner(p2_, p2_) += structure_prec_ / sigma2;
  const auto llt = cholesky(precision, "V^{-1}");
  const VectorXd b = xty_ / tau2;
  const double log_det_sigma = static_cast<double>(p2_) * std::log(sigma2) + structure_log_det_;
  return -0.5 * static_cast<double>(n_) * std::log(tau2) - 0.5 * log_det_sigma - 0.5 * log_det(llt) -
         0.5 * yty_ / tau2 + 0.5 * b.dot(llt.solve(b));
}

NelderMeadResult nelder_mead(const std::function<double(const VectorXd&)>& f, const VectorXd& x0,
                             const NelderMeadOptions& opts) {
  const Index d = x0.size();
  std::vector<VectorXd> pts(static_cast<std::size_t>(d + 1), x0);
  for (Index i = 0; i < d; ++i) pts[static_cast<std::size_t>(i + 1)](i) += opts.step;
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> idx(pts.size());
  NelderMeadResult res;
  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];

    double size = 0.0;
    for (const auto& p : pts) size = std::max(size, (p - pts[best]).cwiseAbs().maxCoeff());
    if (std::abs(vals[worst] - vals[best]) <= opts.tol * (1.0 + std::abs(vals[best])) && size < 1e-8) {
      res.converged = true;
      break;
    }

    VectorXd centroid = VectorXd::Zero(d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(d);

    const VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr < vals[best]) {
      const VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const VectorXd xc = outside ? VectorXd(centroid + 0.5 * (xr - centroid))
                                : VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  res.value = *it;
  return res;
}

VarianceMode maximize_variance_likelihood(const VarianceLikelihood& lik, double sigma2_start,
                                          double tau2_start, double sigma2_floor) {
  if (!(sigma2_start > 0.0) || !(tau2_start > 0.0) || !(sigma2_floor > 0.0)) {
    fail(Errc::InvalidArgument, "starting variances must be positive");
  }
  const double floor = std::log(sigma2_floor);
  auto objective = [&](const VectorXd& z) {
    const double ls = std::max(z(0), floor);
    // Quadratic wall keeps the simplex near the floor instead of flat.
    const double wall = z(0) < floor ? (floor - z(0)) * (floor - z(0)) : 0.0;
    if (!std::isfinite(z(1)) || std::abs(z(1)) > 700.0 || std::abs(ls) > 700.0) {
      return std::numeric_limits<double>::infinity();
    }
    try {
      return -lik(std::exp(ls), std::exp(z(1))) + wall;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  VectorXd x0(2);
  x0 << std::max(std::log(sigma2_start), floor), std::log(tau2_start);
  NelderMeadOptions opts;
  opts.step = 0.5;
  opts.tol = 1e-12;
  // Restart once from the optimum to shake off a collapsed simplex.
  NelderMeadResult r = nelder_mead(objective, x0, opts);
  r = nelder_mead(objective, r.x, opts);
  VarianceMode mode;
  mode.sigma2 = std::exp(std::max(r.x(0), floor));
  mode.tau2 = std::exp(r.x(1));
  mode.log_lik = -r.value;
  mode.converged = r.converged;
  return mode;
}

}  // namespace axecv
