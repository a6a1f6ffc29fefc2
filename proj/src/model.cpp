#include "axecv/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "axecv/error.hpp"

namespace axecv {

std::string_view to_string(Family f) noexcept {
  return f == Family::gaussian ? "gaussian" : "poisson-log";
}

std::string_view to_string(FoldScheme s) noexcept {
  switch (s) {
    case FoldScheme::loo: return "loo";
    case FoldScheme::lco: return "lco";
    case FoldScheme::kfold: return "kfold";
  }
  return "?";
}

std::string_view to_string(PlugInSource s) noexcept {
  switch (s) {
    case PlugInSource::posterior_mean: return "posterior-mean";
    case PlugInSource::map: return "map";
    case PlugInSource::external: return "external";
  }
  return "?";
}

FoldScheme parse_fold_scheme(std::string_view s) {
  if (s == "loo") return FoldScheme::loo;
  if (s == "lco") return FoldScheme::lco;
  if (s == "kfold") return FoldScheme::kfold;
  fail(Errc::InvalidArgument, "unknown fold scheme '" + std::string(s) + "' (loo, lco, kfold)");
}

MatrixXd ModelSpec::design() const {
  MatrixXd x(n(), p());
  x << x1, x2;
  return x;
}

ModelSpec ModelSpec::subset(const IndexSet& rows) const {
  ModelSpec out = *this;
  out.x1 = select_rows(x1, rows);
  out.x2 = select_rows(x2, rows);
  out.response = select(response, rows);
  if (offset) out.offset = select(*offset, rows);
  if (known_variance) out.known_variance = select(*known_variance, rows);
  return out;
}

void VarianceEstimates::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    fail(Errc::InvalidArgument, "tau must be positive and finite");
  }
  if (!is_symmetric(sigma, 1e-10)) fail(Errc::NotPositiveDefinite, "Sigma plug-in is not symmetric");
  cholesky(sigma, "Sigma plug-in");
}

VectorXd noise_variance(const ModelSpec& spec, double tau) {
  if (spec.known_variance) return *spec.known_variance;
  return VectorXd::Constant(spec.n(), tau * tau);
}

MatrixXd prior_precision(const ModelSpec& spec, const MatrixXd& sigma) {
  const Index p1 = spec.p1();
  const Index p2 = spec.p2();
  if (sigma.rows() != p2 || sigma.cols() != p2) {
    fail(Errc::DimensionMismatch, "Sigma is " + std::to_string(sigma.rows()) + "x" +
                                      std::to_string(sigma.cols()) + ", expected " +
                                      std::to_string(p2) + "x" + std::to_string(p2));
  }
  MatrixXd prec = MatrixXd::Zero(p1 + p2, p1 + p2);
  if (!spec.prior_infinite && p1 > 0) {
    prec.topLeftCorner(p1, p1) = spd_inverse(spec.prior_cov, "fixed-effect prior C");
  }
  if (p2 > 0) prec.bottomRightCorner(p2, p2) = spd_inverse(sigma, "Sigma");
  return prec;
}

void validate_model(const ModelSpec& spec) {
  const Index n = spec.n();
  if (spec.x1.rows() != n || spec.x2.rows() != n) {
    fail(Errc::DimensionMismatch, "rows(X1)=" + std::to_string(spec.x1.rows()) +
                                      ", rows(X2)=" + std::to_string(spec.x2.rows()) +
                                      ", len(Y)=" + std::to_string(n));
  }
  if (spec.offset && spec.offset->size() != n) fail(Errc::DimensionMismatch, "offset length");
  if (spec.known_variance && spec.known_variance->size() != n) {
    fail(Errc::DimensionMismatch, "known variance length");
  }
  if (!spec.response.allFinite() || !spec.x1.allFinite() || !spec.x2.allFinite()) {
    fail(Errc::InvalidArgument, "non-finite entries in response or design");
  }
  if (spec.offset && !(spec.offset->array() > 0.0).all()) {
    fail(Errc::InvalidArgument, "offset must be strictly positive");
  }
  if (spec.known_variance && !(spec.known_variance->array() > 0.0).all()) {
    fail(Errc::InvalidArgument, "known variances must be strictly positive");
  }
  if (spec.family == Family::poisson_log && (spec.response.array() < 0.0).any()) {
    fail(Errc::InvalidArgument, "poisson response must be nonnegative");
  }

  // The all-ones vector must lie in span(X1).
  if (n > 0) {
    const VectorXd ones = VectorXd::Ones(n);
    double rel = 1.0;
    if (spec.p1() > 0) {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(spec.x1);
      const VectorXd coef = qr.solve(ones);
      rel = (spec.x1 * coef - ones).norm() / ones.norm();
    }
    if (!(rel < 1e-8)) {
      fail(Errc::NoInterceptSpan, "ones vector is not in span(X1), relative residual " +
                                      std::to_string(rel));
    }
  }

  if (!spec.prior_infinite) {
    if (spec.prior_cov.rows() != spec.p1() || spec.prior_cov.cols() != spec.p1()) {
      fail(Errc::DimensionMismatch, "C must be P1 x P1");
    }
    if (!is_symmetric(spec.prior_cov, 1e-12)) fail(Errc::NotPositiveDefinite, "C is not symmetric");
    cholesky(spec.prior_cov, "fixed-effect prior C");
  }

  if (spec.cov.dim() != spec.p2()) {
    fail(Errc::DimensionMismatch, "covariance structure has dimension " +
                                      std::to_string(spec.cov.dim()) + ", X2 has " +
                                      std::to_string(spec.p2()) + " columns");
  }
  spec.cov.validate();
  cholesky(spec.cov.sigma(), "generated Sigma");
}

FoldPlan build_fold_plan(FoldScheme scheme, Index n,
                         const std::optional<std::vector<long long>>& labels,
                         std::optional<int> k, std::uint64_t seed) {
  FoldPlan plan;
  plan.scheme = scheme;
  switch (scheme) {
    case FoldScheme::loo: {
      for (Index i = 0; i < n; ++i) plan.folds.push_back({i});
      break;
    }
    case FoldScheme::lco: {
      if (!labels) fail(Errc::MissingLabels, "leave-cluster-out needs cluster labels");
      if (static_cast<Index>(labels->size()) != n) {
        fail(Errc::DimensionMismatch, "cluster labels length differs from N");
      }
      std::map<long long, IndexSet> by_label;
      for (Index i = 0; i < n; ++i) by_label[(*labels)[static_cast<std::size_t>(i)]].push_back(i);
      for (auto& [label, rows] : by_label) plan.folds.push_back(std::move(rows));
      plan.cluster_labels = labels;
      break;
    }
    case FoldScheme::kfold: {
      if (!k) fail(Errc::BadK, "k-fold needs k");
      if (*k < 2 || *k > n) {
        fail(Errc::BadK, "k must satisfy 2 <= k <= N, got k=" + std::to_string(*k) +
                             " with N=" + std::to_string(n));
      }
      IndexSet order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), Index{0});
      std::mt19937_64 rng(seed);
      std::shuffle(order.begin(), order.end(), rng);
      const Index base = n / *k;
      const Index extra = n % *k;
      Index pos = 0;
      for (Index f = 0; f < *k; ++f) {
        const Index size = base + (f < extra ? 1 : 0);
        IndexSet fold(order.begin() + pos, order.begin() + pos + size);
        std::sort(fold.begin(), fold.end());
        plan.folds.push_back(std::move(fold));
        pos += size;
      }
      break;
    }
  }
  return plan;
}

void validate_fold_plan(const FoldPlan& plan, Index n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& fold : plan.folds) {
    for (std::size_t i = 0; i < fold.size(); ++i) {
      const Index r = fold[i];
      if (r < 0 || r >= n) fail(Errc::InvalidArgument, "fold row out of range");
      if (i > 0 && fold[i - 1] >= r) fail(Errc::InvalidArgument, "fold rows must be sorted and unique");
      if (seen[static_cast<std::size_t>(r)]++) fail(Errc::InvalidArgument, "folds overlap");
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c == 0; })) {
    fail(Errc::InvalidArgument, "folds do not cover every row");
  }
  if (plan.scheme == FoldScheme::lco) {
    if (!plan.cluster_labels) fail(Errc::MissingLabels, "lco plan without labels");
    const auto& lab = *plan.cluster_labels;
    for (const auto& fold : plan.folds) {
      if (fold.empty()) fail(Errc::InvalidArgument, "empty fold in lco plan");
      const long long l = lab[static_cast<std::size_t>(fold.front())];
      std::size_t count = 0;
      for (Index i = 0; i < n; ++i) count += lab[static_cast<std::size_t>(i)] == l ? 1 : 0;
      for (Index r : fold) {
        if (lab[static_cast<std::size_t>(r)] != l) fail(Errc::InvalidArgument, "fold mixes clusters");
      }
      if (count != fold.size()) fail(Errc::InvalidArgument, "fold misses rows of its cluster");
    }
  }
}

}  // namespace axecv
