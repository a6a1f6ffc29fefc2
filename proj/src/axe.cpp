#include "axecv/axe.hpp"

#include <cmath>
#include <string>

#include "axecv/error.hpp"
#include "axecv/linalg.hpp"
#include "axecv/parallel.hpp"

namespace axecv {

namespace {

void require_gaussian(const ModelSpec& spec) {
  if (spec.family != Family::gaussian) {
    fail(Errc::InvalidArgument,
         "plug-in estimates need a Gaussian model; substitute the pseudo-response first");
  }
}

void require_fold(const ModelSpec& spec, const IndexSet& fold) {
  if (fold.empty()) fail(Errc::EmptyFold, "test fold is empty");
  if (static_cast<Index>(fold.size()) >= spec.n()) {
    fail(Errc::EmptyTrainingSet, "fold removes every observation");
  }
  for (Index r : fold) {
    if (r < 0 || r >= spec.n()) fail(Errc::InvalidArgument, "fold row out of range");
  }
}

struct FullFit {
  ConditionalPosterior cp;
  VectorXd noise;
};

VectorXd predict_downdated(const FullFit& fit, const ModelSpec& spec, const IndexSet& fold) {
  const auto& cp = fit.cp;
  const MatrixXd xj = select_rows(cp.design, fold);
  const VectorXd yj = select(spec.response, fold);
  const VectorXd prec_j = select(cp.row_precision, fold);

  MatrixXd v_minus;
  if (rows_identical(cp.design, fold)) {
    v_minus = rank_one_downdate(cp.v, xj.row(0).transpose(), prec_j.sum());
  } else {
    v_minus = block_downdate(cp.v, xj, select(fit.noise, fold));
  }
  const VectorXd score_minus = cp.score - xj.transpose() * prec_j.cwiseProduct(yj);
  return xj * (v_minus * score_minus);
}

}  // namespace

VectorXd axe_fold(const ModelSpec& spec, const VarianceEstimates& var, const IndexSet& fold) {
  require_gaussian(spec);
  require_fold(spec, fold);
  var.validate();

  const IndexSet train = complement(fold, spec.n());
  const MatrixXd x = spec.design();
  const MatrixXd x_train = select_rows(x, train);
  const VectorXd prec = select(noise_variance(spec, var.tau), train).cwiseInverse();
  const MatrixXd weighted = prec.asDiagonal() * x_train;

  const MatrixXd precision = x_train.transpose() * weighted + prior_precision(spec, var.sigma);
  const auto llt = cholesky(precision, "training precision");
  const VectorXd coef = llt.solve(weighted.transpose() * select(spec.response, train));
  return select_rows(x, fold) * coef;
}

CvResult axe_run(const ModelSpec& spec, const VarianceEstimates& var, const FoldPlan& plan,
                 const AxeOptions& opts) {
  require_gaussian(spec);
  var.validate();
  for (const auto& fold : plan.folds) require_fold(spec, fold);

  CvResult result;
  result.method = Method::axe;
  result.meta.plug_in = var.source;
  result.meta.detail = opts.path == AxePath::direct ? "direct" : "downdate";
  result.folds.resize(plan.size());

  std::optional<FullFit> full;
  if (opts.path == AxePath::automatic) {
    full = FullFit{conditional_posterior(spec, var), noise_variance(spec, var.tau)};
  }

  parallel_for(plan.size(), opts.threads, [&](std::size_t f) {
    const auto& fold = plan.folds[f];
    auto& rec = result.folds[f];
    rec.fold_id = f;
    rec.rows = fold;
    try {
      if (full) {
        try {
          rec.predicted = predict_downdated(*full, spec, fold);
          return;
        } catch (const Error& e) {
          if (e.code() != Errc::SingularDowndate) throw;
        }
      }
      rec.predicted = axe_fold(spec, var, fold);
    } catch (const Error& e) {
      throw e.with_fold(f);
    }
  });
  return result;
}

PseudoResponse glmm_pseudo_response(const ModelSpec& spec, const VectorXd& beta_hat,
                                    const VectorXd& fitted_mean, PseudoVariance variant) {
  if (spec.family != Family::poisson_log) {
    fail(Errc::InvalidArgument, "pseudo-response is defined for the poisson-log family");
  }
  const Index n = spec.n();
  const VectorXd exposure = spec.offset ? *spec.offset : VectorXd::Ones(n);

  VectorXd mu;
  if (fitted_mean.size() > 0) {
    if (fitted_mean.size() != n) fail(Errc::DimensionMismatch, "fitted mean length");
    mu = fitted_mean;
  } else {
    if (beta_hat.size() != spec.p()) fail(Errc::DimensionMismatch, "beta_hat length");
    mu = exposure.cwiseProduct((spec.design() * beta_hat).array().exp().matrix());
  }

  PseudoResponse pr;
  pr.yg.resize(n);
  pr.pvar.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (!(mu(i) > 0.0) || !std::isfinite(mu(i))) {
      fail(Errc::NonpositiveRate, "fitted rate at row " + std::to_string(i + 1) + " is " +
                                      std::to_string(mu(i)));
    }
    const double lambda = mu(i) / exposure(i);
    pr.yg(i) = std::log(lambda);
    pr.pvar(i) = variant == PseudoVariance::delta_method ? 1.0 / mu(i) : mu(i) * mu(i) * mu(i);
  }
  return pr;
}

ModelSpec with_pseudo_response(const ModelSpec& spec, const PseudoResponse& pr) {
  if (pr.yg.size() != spec.n() || pr.pvar.size() != spec.n()) {
    fail(Errc::DimensionMismatch, "pseudo-response length");
  }
  if (!(pr.pvar.array() > 0.0).all()) fail(Errc::InvalidArgument, "pseudo-variances must be positive");
  ModelSpec out = spec;
  out.family = Family::gaussian;
  out.response = pr.yg;
  out.known_variance = pr.pvar;
  return out;
}

VectorXd to_response_scale(const ModelSpec& spec, const VectorXd& eta, const IndexSet& rows) {
  if (spec.family == Family::gaussian) return eta;
  VectorXd out(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    const double e = spec.offset ? (*spec.offset)(rows[static_cast<std::size_t>(i)]) : 1.0;
    out(i) = e * std::exp(eta(i));
  }
  return out;
}

}  // namespace axecv
