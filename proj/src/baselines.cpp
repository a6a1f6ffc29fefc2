#include "axecv/baselines.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "axecv/axe.hpp"
#include "axecv/error.hpp"
#include "axecv/linalg.hpp"
#include "axecv/parallel.hpp"
#include "axecv/random.hpp"

namespace axecv {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_draws(const PosteriorDraws& draws, const ModelSpec& spec) {
  if (draws.size() < 1) fail(Errc::InvalidArgument, "posterior draws are empty");
  if (draws.p() != spec.p()) fail(Errc::DimensionMismatch, "draws have a different P than the model");
  if (draws.p2() != spec.p2()) fail(Errc::DimensionMismatch, "Sigma draws have a different P2");
}

void require_fold(const ModelSpec& spec, const IndexSet& fold) {
  if (fold.empty()) fail(Errc::EmptyFold, "test fold is empty");
  for (Index r : fold) {
    if (r < 0 || r >= spec.n()) fail(Errc::InvalidArgument, "fold row out of range");
  }
}

// Held-out effect bookkeeping for one fold.
struct Split {
  Index p1 = 0;
  IndexSet held;
  MatrixXd xj;   // test rows of [X1 X2]
  MatrixXd xjh;  // test rows of the held X2 columns
  // Under the scaled form coef is fixed and cov scales with sigma2.
  std::optional<ConditionalGaussian> structure_cond;
  MatrixXd structure_cov_factor;
};

Split make_split(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold) {
  Split sp;
  sp.p1 = spec.p1();
  sp.held = held_out_columns(spec, fold);
  sp.xj = select_rows(spec.design(), fold);
  sp.xjh = select_block(spec.x2, fold, sp.held);
  if (!sp.held.empty() && draws.scaled()) {
    sp.structure_cond = condition_on_rest(draws.sigma_structure, sp.held);
    sp.structure_cov_factor = cholesky(sp.structure_cond->cov, "conditional covariance").matrixL();
  }
  return sp;
}

// theta_h | theta_rest at draw s: mean a and lower factor of M.
struct DrawConditional {
  VectorXd a;
  MatrixXd cov;
  MatrixXd factor;
};

DrawConditional draw_conditional(const PosteriorDraws& draws, const Split& sp, Index s,
                                 const VectorXd& theta, bool need_factor) {
  DrawConditional dc;
  if (sp.structure_cond) {
    const double scale = draws.sigma_scale(s);
    dc.a = sp.structure_cond->coef * select(theta, sp.structure_cond->rest);
    dc.cov = scale * sp.structure_cond->cov;
    if (need_factor) dc.factor = std::sqrt(scale) * sp.structure_cov_factor;
  } else {
    const auto cond = condition_on_rest(draws.sigma(s), sp.held);
    dc.a = cond.coef * select(theta, cond.rest);
    dc.cov = cond.cov;
    if (need_factor) dc.factor = cholesky(cond.cov, "conditional covariance").matrixL();
  }
  return dc;
}

// mu_j: X_j beta with held effects removed.
VectorXd mu_part(const Split& sp, VectorXd b) {
  for (Index h : sp.held) b(sp.p1 + h) = 0.0;
  return sp.xj * b;
}

VectorXd fold_noise(const ModelSpec& lik, const IndexSet& fold, double tau2) {
  if (lik.known_variance) return select(*lik.known_variance, fold);
  return VectorXd::Constant(static_cast<Index>(fold.size()), tau2);
}

double diagonal_log_density(const VectorXd& y, const VectorXd& mean, const VectorXd& var) {
  double out = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double r = y(i) - mean(i);
    out += -0.5 * (kLog2Pi + std::log(var(i)) + r * r / var(i));
  }
  return out;
}

double checked(double log_density, Index s) {
  if (!std::isfinite(log_density)) {
    fail(Errc::NonFiniteLogDensity, "log density at draw " + std::to_string(s + 1) + " is not finite");
  }
  return log_density;
}

template <class Fn>
CvResult run_folds(Method method, const FoldPlan& plan, std::uint64_t seed, int threads, Fn&& fn) {
  CvResult result;
  result.method = method;
  result.meta.plug_in = PlugInSource::posterior_mean;
  result.meta.seed = seed;
  result.folds.resize(plan.size());
  parallel_for(plan.size(), threads, [&](std::size_t f) {
    auto& rec = result.folds[f];
    rec.fold_id = f;
    rec.rows = plan.folds[f];
    try {
      fn(f, rec);
    } catch (const Error& e) {
      throw e.with_fold(f);
    }
  });
  return result;
}

}  // namespace

MatrixXd ghost_draws(const VectorXd& theta_rest, const MatrixXd& sigma, const IndexSet& held,
                     int count, std::uint64_t seed) {
  if (count < 0) fail(Errc::InvalidArgument, "draw count must be nonnegative");
  const Index h = static_cast<Index>(held.size());
  if (count == 0 || h == 0) return MatrixXd(count, h);
  if (theta_rest.size() != sigma.rows() - h) fail(Errc::DimensionMismatch, "theta_rest length");
  const auto cond = condition_on_rest(sigma, held);
  const VectorXd a = cond.coef * theta_rest;
  const MatrixXd l = cholesky(cond.cov, "conditional covariance").matrixL();
  Rng rng(seed);
  MatrixXd out(count, h);
  for (int r = 0; r < count; ++r) out.row(r) = mvnormal_from_factor(rng, a, l).transpose();
  return out;
}

VectorXd ghost_estimate(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold,
                        std::uint64_t seed) {
  require_draws(draws, spec);
  require_fold(spec, fold);
  const Split sp = make_split(draws, spec, fold);
  const Index p2 = spec.p2();
  Rng rng(seed);
  VectorXd acc = VectorXd::Zero(static_cast<Index>(fold.size()));
  VectorXd b(spec.p());
  for (Index s = 0; s < draws.size(); ++s) {
    b = draws.beta.row(s).transpose();
    if (!sp.held.empty()) {
      const DrawConditional dc = draw_conditional(draws, sp, s, b.tail(p2), true);
      const VectorXd theta_h = mvnormal_from_factor(rng, dc.a, dc.factor);
      for (std::size_t i = 0; i < sp.held.size(); ++i) {
        b(sp.p1 + sp.held[i]) = theta_h(static_cast<Index>(i));
      }
    }
    acc += sp.xj * b;
  }
  acc /= static_cast<double>(draws.size());
  return to_response_scale(spec, acc, fold);
}

ImportanceEstimate self_normalized(const VectorXd& log_w, const MatrixXd& values,
                                   const ImportanceOptions& opts) {
  if (values.rows() != log_w.size()) fail(Errc::DimensionMismatch, "one value row per weight");
  ImportanceEstimate out;
  out.weights = opts.psis && log_w.size() >= 5 ? psis_smooth(log_w, opts.tail_fraction)
                                               : raw_weights(log_w);
  out.ess = effective_sample_size(out.weights.normalized);
  if (log_w.size() >= 2 && out.ess < 2.0) {
    fail(Errc::DegenerateWeights, "effective sample size " + std::to_string(out.ess) + " < 2");
  }
  out.predicted = values.transpose() * out.weights.normalized;
  return out;
}

ModelSpec likelihood_model(const PosteriorDraws& draws, const ModelSpec& spec) {
  if (spec.family == Family::gaussian) return spec;
  require_draws(draws, spec);
  const MatrixXd x = spec.design();
  const VectorXd exposure = spec.offset ? *spec.offset : VectorXd::Ones(spec.n());
  VectorXd fitted = VectorXd::Zero(spec.n());
  for (Index s = 0; s < draws.size(); ++s) {
    fitted += (x * draws.beta.row(s).transpose()).array().exp().matrix();
  }
  fitted = exposure.cwiseProduct(fitted) / static_cast<double>(draws.size());
  return with_pseudo_response(spec, glmm_pseudo_response(spec, VectorXd(), fitted));
}

ImportanceEstimate iis_c(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold,
                         const ImportanceOptions& opts) {
  require_draws(draws, spec);
  require_fold(spec, fold);
  if (opts.monte_carlo_theta && opts.mc_theta_draws < 1) {
    fail(Errc::InvalidArgument, "Monte Carlo integration needs at least one theta draw");
  }
  const ModelSpec lik = likelihood_model(draws, spec);
  const Split sp = make_split(draws, spec, fold);
  const VectorXd yj = select(lik.response, fold);
  const Index nj = static_cast<Index>(fold.size());
  const Index p2 = spec.p2();
  const Index count = draws.size();

  VectorXd log_w(count);
  MatrixXd values(count, nj);
  parallel_for(static_cast<std::size_t>(count), opts.threads, [&](std::size_t su) {
    const Index s = static_cast<Index>(su);
    const VectorXd b = draws.beta.row(s).transpose();
    const VectorXd noise = fold_noise(lik, fold, draws.tau2(s));
    VectorXd mean = mu_part(sp, b);
    if (sp.held.empty()) {
      values.row(s) = mean.transpose();
      log_w(s) = -checked(diagonal_log_density(yj, mean, noise), s);
      return;
    }
    const DrawConditional dc = draw_conditional(draws, sp, s, b.tail(p2), opts.monte_carlo_theta);
    if (!opts.monte_carlo_theta) {
      mean += sp.xjh * dc.a;
      MatrixXd cov = sp.xjh * dc.cov * sp.xjh.transpose();
      cov.diagonal() += noise;
      values.row(s) = mean.transpose();
      log_w(s) = -checked(normal_log_density(yj, mean, cholesky(cov, "Y_j covariance")), s);
      return;
    }
    std::seed_seq seq{static_cast<std::uint64_t>(opts.seed), static_cast<std::uint64_t>(s)};
    Rng rng(seq);
    VectorXd lf(opts.mc_theta_draws);
    for (int r = 0; r < opts.mc_theta_draws; ++r) {
      const VectorXd theta_h = mvnormal_from_factor(rng, dc.a, dc.factor);
      lf(r) = diagonal_log_density(yj, mean + sp.xjh * theta_h, noise);
    }
    const double mx = lf.maxCoeff();
    const double log_f = mx + std::log((lf.array() - mx).exp().mean());
    values.row(s) = (mean + sp.xjh * dc.a).transpose();
    log_w(s) = -checked(log_f, s);
  });

  ImportanceEstimate est = self_normalized(log_w, values, opts);
  est.predicted = to_response_scale(spec, est.predicted, fold);
  return est;
}

ImportanceEstimate iis_a(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold,
                         const ImportanceOptions& opts) {
  require_draws(draws, spec);
  require_fold(spec, fold);
  const ModelSpec lik = likelihood_model(draws, spec);
  const IndexSet train = complement(fold, lik.n());
  if (train.empty()) fail(Errc::EmptyTrainingSet, "fold removes every observation");

  const Index p1 = lik.p1();
  const Index p2 = lik.p2();
  const bool known_var = lik.known_variance.has_value();
  const MatrixXd x = lik.design();
  const MatrixXd xj = select_rows(x, fold);
  const MatrixXd xt = select_rows(x, train);
  const VectorXd yj = select(lik.response, fold);
  const VectorXd w_train =
      known_var ? VectorXd(select(*lik.known_variance, train).cwiseInverse())
                : VectorXd(VectorXd::Ones(static_cast<Index>(train.size())));
  const MatrixXd weighted = w_train.asDiagonal() * xt;
  const MatrixXd gram = xt.transpose() * weighted;
  const VectorXd score = weighted.transpose() * select(lik.response, train);

  MatrixXd fixed_prec = MatrixXd::Zero(p1, p1);
  if (!lik.prior_infinite && p1 > 0) fixed_prec = spd_inverse(lik.prior_cov, "fixed-effect prior C");
  MatrixXd structure_prec;
  if (draws.scaled() && p2 > 0) structure_prec = spd_inverse(draws.sigma_structure, "Sigma structure");

  const Index count = draws.size();
  VectorXd log_w(count);
  MatrixXd values(count, static_cast<Index>(fold.size()));
  parallel_for(static_cast<std::size_t>(count), opts.threads, [&](std::size_t su) {
    const Index s = static_cast<Index>(su);
    const double inv_tau2 = known_var ? 1.0 : 1.0 / draws.tau2(s);
    MatrixXd precision = inv_tau2 * gram;
    if (p1 > 0) precision.topLeftCorner(p1, p1) += fixed_prec;
    if (p2 > 0) {
      precision.bottomRightCorner(p2, p2) +=
          draws.scaled() ? MatrixXd(structure_prec / draws.sigma_scale(s))
                         : spd_inverse(draws.sigma(s), "Sigma draw");
    }
    const auto llt = cholesky(precision, "training precision");
    const VectorXd mean = xj * llt.solve(inv_tau2 * score);
    MatrixXd cov = xj * llt.solve(xj.transpose());
    cov.diagonal() += fold_noise(lik, fold, draws.tau2(s));
    values.row(s) = mean.transpose();
    log_w(s) = -checked(normal_log_density(yj, mean, cholesky(cov, "Y_j covariance")), s);
  });

  ImportanceEstimate est = self_normalized(log_w, values, opts);
  est.predicted = to_response_scale(spec, est.predicted, fold);
  return est;
}

CvResult ghost_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan,
                   std::uint64_t seed, int threads) {
  return run_folds(Method::ghost, plan, seed, threads, [&](std::size_t f, FoldPrediction& rec) {
    rec.predicted = ghost_estimate(draws, spec, plan.folds[f], seed + f);
  });
}

namespace {

template <class Estimator>
CvResult importance_run(Method method, const PosteriorDraws& draws, const ModelSpec& spec,
                        const FoldPlan& plan, const ImportanceOptions& opts, Estimator&& est) {
  ImportanceOptions inner = opts;
  inner.threads = 1;
  CvResult out = run_folds(method, plan, opts.seed, opts.threads, [&](std::size_t f, FoldPrediction& rec) {
    ImportanceOptions fold_opts = inner;
    fold_opts.seed = opts.seed + f;
    const ImportanceEstimate e = est(draws, spec, plan.folds[f], fold_opts);
    rec.predicted = e.predicted;
    rec.weights = e.weights.normalized;
    rec.khat = e.weights.khat;
    rec.ess = e.ess;
  });
  out.meta.detail = opts.psis ? "psis" : "raw";
  return out;
}

}  // namespace

CvResult iis_c_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan,
                   const ImportanceOptions& opts) {
  return importance_run(Method::iis_c, draws, spec, plan, opts,
                        [](const auto& d, const auto& m, const auto& f, const auto& o) {
                          return iis_c(d, m, f, o);
                        });
}

CvResult iis_a_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan,
                   const ImportanceOptions& opts) {
  return importance_run(Method::iis_a, draws, spec, plan, opts,
                        [](const auto& d, const auto& m, const auto& f, const auto& o) {
                          return iis_a(d, m, f, o);
                        });
}

}  // namespace axecv
