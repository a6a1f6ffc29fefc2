#include "axecv/gibbs.hpp"

#include <cmath>
#include <string>

#include "axecv/error.hpp"
#include "axecv/linalg.hpp"
#include "axecv/parallel.hpp"
#include "axecv/random.hpp"

namespace axecv {

void GibbsConfig::validate(Index p2) const {
  if (draws < 1) fail(Errc::BadConfig, "need at least one post-burn-in draw");
  if (burn_in < 0) fail(Errc::BadConfig, "burn-in must be nonnegative");
  if (!(a > 0.0) || !(b > 0.0)) fail(Errc::BadPriors, "tau^2 prior needs a, b > 0");
  if (sigma_prior == SigmaPrior::scaled) {
    if (!(nu > 0.0)) fail(Errc::BadPriors, "scaled Sigma prior needs nu > 0");
    if (psi.rows() != 1 || psi.cols() != 1 || !(psi(0, 0) > 0.0)) {
      fail(Errc::BadPriors, "scaled Sigma prior needs a positive 1x1 psi");
    }
  } else {
    if (!(nu > static_cast<double>(p2) - 1.0)) fail(Errc::BadPriors, "inverse-Wishart needs nu > P2 - 1");
    if (psi.rows() != p2 || psi.cols() != p2) fail(Errc::BadPriors, "Psi must be P2 x P2");
    if (!is_symmetric(psi, 1e-12)) fail(Errc::BadPriors, "Psi must be symmetric");
    try {
      cholesky(psi, "Psi");
    } catch (const Error&) {
      fail(Errc::BadPriors, "Psi must be positive definite");
    }
  }
}

Index PosteriorDraws::p2() const {
  if (!sigma_full.empty()) return sigma_full.front().rows();
  return sigma_structure.rows();
}

MatrixXd PosteriorDraws::sigma(Index s) const {
  if (!sigma_full.empty()) return sigma_full[static_cast<std::size_t>(s)];
  return sigma_scale(s) * sigma_structure;
}

bool PosteriorDraws::sigma_diagonal() const {
  auto off_diagonal_zero = [](const MatrixXd& m) {
    MatrixXd off = m;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() == 0.0;
  };
  if (p2() <= 1) return true;
  if (!sigma_full.empty()) {
    for (const auto& m : sigma_full) {
      if (!off_diagonal_zero(m)) return false;
    }
    return true;
  }
  return off_diagonal_zero(sigma_structure);
}

void PosteriorDraws::validate() const {
  const Index s = size();
  if (s < 1) fail(Errc::BadConfig, "posterior draws are empty");
  if (tau2.size() != s) fail(Errc::ManifestMismatch, "tau2 draws count differs from beta");
  for (Index i = 0; i < s; ++i) {
    if (!(tau2(i) > 0.0)) fail(Errc::InvalidArgument, "tau2 draw " + std::to_string(i + 1) + " not positive");
  }
  if (!sigma_full.empty()) {
    if (static_cast<Index>(sigma_full.size()) != s) {
      fail(Errc::ManifestMismatch, "Sigma draws count differs from beta");
    }
    for (Index i = 0; i < s; ++i) {
      const auto& m = sigma_full[static_cast<std::size_t>(i)];
      if (!is_symmetric(m, 1e-10)) {
        fail(Errc::NotPositiveDefinite, "Sigma draw " + std::to_string(i + 1) + " is not symmetric");
      }
      try {
        cholesky(m, "Sigma draw");
      } catch (const Error&) {
        fail(Errc::NotPositiveDefinite, "Sigma draw " + std::to_string(i + 1) + " is not positive definite");
      }
    }
  } else {
    if (sigma_scale.size() != s) fail(Errc::ManifestMismatch, "Sigma scale count differs from beta");
    if (!(sigma_scale.array() > 0.0).all()) fail(Errc::NotPositiveDefinite, "Sigma scale not positive");
    if (sigma_structure.size() > 0) cholesky(sigma_structure, "Sigma structure");
  }
}

PosteriorDraws gibbs_run(const ModelSpec& spec, const GibbsConfig& cfg) {
  if (spec.family != Family::gaussian) {
    fail(Errc::InvalidArgument, "the Gibbs sampler needs a Gaussian model");
  }
  validate_model(spec);
  const Index n = spec.n();
  const Index p1 = spec.p1();
  const Index p2 = spec.p2();
  const Index p = p1 + p2;
  cfg.validate(p2);

  const bool known_var = spec.known_variance.has_value();
  const MatrixXd x = spec.design();
  const VectorXd& y = spec.response;
  const VectorXd row_weight =
      known_var ? VectorXd(spec.known_variance->cwiseInverse()) : VectorXd(VectorXd::Ones(n));
  const MatrixXd weighted = row_weight.asDiagonal() * x;
  const MatrixXd xtwx = x.transpose() * weighted;
  const VectorXd xtwy = weighted.transpose() * y;

  MatrixXd fixed_prec = MatrixXd::Zero(p1, p1);
  if (!spec.prior_infinite && p1 > 0) fixed_prec = spd_inverse(spec.prior_cov, "fixed-effect prior C");

  // Sigma state.
  const bool scaled = cfg.sigma_prior == SigmaPrior::scaled;
  MatrixXd structure_prec;
  MatrixXd structure;
  double sigma2 = spec.cov.sigma2;
  MatrixXd sigma_full;
  MatrixXd sigma_inv;
  if (scaled) {
    structure_prec = spec.cov.structure_precision();
    structure = spec.cov.structure();
    sigma_inv = structure_prec / sigma2;
  } else {
    sigma_full = spec.cov.sigma();
    sigma_inv = spd_inverse(sigma_full, "initial Sigma");
  }

  double tau2 = 1.0;
  if (!known_var) {
    if (cfg.init_tau2) {
      tau2 = *cfg.init_tau2;
    } else if (n >= 2) {
      const double var = (y.array() - y.mean()).square().sum() / static_cast<double>(n - 1);
      if (var > 0.0) tau2 = var;
    }
    if (!(tau2 > 0.0)) fail(Errc::BadConfig, "initial tau^2 must be positive");
  }

  PosteriorDraws out;
  out.beta.resize(cfg.draws, p);
  out.tau2.resize(cfg.draws);
  out.burn_in = cfg.burn_in;
  out.seed = cfg.seed;
  if (scaled) {
    out.sigma_scale.resize(cfg.draws);
    out.sigma_structure = structure;
  } else {
    out.sigma_full.reserve(static_cast<std::size_t>(cfg.draws));
  }

  Rng rng(cfg.seed);
  MatrixXd precision(p, p);
  VectorXd beta(p);
  const int total = cfg.burn_in + cfg.draws;
  for (int it = 0; it < total; ++it) {
    // beta | Sigma, tau
    const double inv_tau2 = known_var ? 1.0 : 1.0 / tau2;
    precision = inv_tau2 * xtwx;
    if (p1 > 0) precision.topLeftCorner(p1, p1) += fixed_prec;
    if (p2 > 0) precision.bottomRightCorner(p2, p2) += sigma_inv;
    const auto llt = cholesky(precision, "conditional precision V^{-1}");
    const VectorXd mean = llt.solve(inv_tau2 * xtwy);
    beta = mean + llt.matrixU().solve(standard_normal(rng, p));

    // Sigma | beta
    if (cfg.update_sigma && p2 > 0) {
      const VectorXd theta = beta.tail(p2);
      if (scaled) {
        const double quad = theta.dot(structure_prec * theta);
        sigma2 = inverse_gamma(rng, 0.5 * (cfg.nu + static_cast<double>(p2)),
                               0.5 * (cfg.psi(0, 0) + quad));
        sigma_inv = structure_prec / sigma2;
      } else {
        sigma_full = inverse_wishart(rng, cfg.nu + 1.0, cfg.psi + theta * theta.transpose());
        sigma_inv = spd_inverse(sigma_full, "Sigma draw");
      }
    }

    // tau^2 | beta
    if (cfg.update_tau && !known_var) {
      const double rss = (y - x * beta).squaredNorm();
      tau2 = inverse_gamma(rng, cfg.a + 0.5 * static_cast<double>(n), cfg.b + 0.5 * rss);
    }

    if (it >= cfg.burn_in) {
      const Index s = it - cfg.burn_in;
      out.beta.row(s) = beta.transpose();
      out.tau2(s) = tau2;
      if (scaled) {
        out.sigma_scale(s) = sigma2;
      } else {
        out.sigma_full.push_back(sigma_full);
      }
    }
  }
  return out;
}

VarianceEstimates plug_in_estimates(const PosteriorDraws& draws) {
  draws.validate();
  VarianceEstimates v;
  v.source = PlugInSource::posterior_mean;
  v.tau = draws.tau2.array().sqrt().mean();
  if (draws.scaled()) {
    v.sigma = draws.sigma_scale.mean() * draws.sigma_structure;
  } else {
    v.sigma = MatrixXd::Zero(draws.p2(), draws.p2());
    for (const auto& m : draws.sigma_full) v.sigma += m;
    v.sigma /= static_cast<double>(draws.size());
  }
  return v;
}

VectorXd posterior_mean_fit(const PosteriorDraws& draws, const MatrixXd& design) {
  if (design.cols() != draws.p()) fail(Errc::DimensionMismatch, "design columns differ from draws");
  return design * draws.beta.colwise().mean().transpose();
}

VectorXd mcv_fold(const ModelSpec& spec, const GibbsConfig& cfg, const IndexSet& fold,
                  std::size_t fold_id) {
  if (fold.empty()) return VectorXd(0);
  const IndexSet train = complement(fold, spec.n());
  if (train.empty()) fail(Errc::EmptyTrainingSet, "fold removes every observation");

  GibbsConfig fold_cfg = cfg;
  fold_cfg.seed = cfg.seed + fold_id;
  fold_cfg.threads = 1;
  const auto draws = gibbs_run(spec.subset(train), fold_cfg);

  const MatrixXd xj = select_rows(spec.design(), fold);
  const IndexSet held = held_out_columns(spec, fold);
  const Index p1 = spec.p1();
  const Index p2 = spec.p2();

  // Held-out effects are predicted by their conditional mean given the rest.
  // Under the scaled form the regression coefficient does not depend on the
  // scale, so it is computed once.
  const bool diagonal = draws.sigma_diagonal();
  std::optional<ConditionalGaussian> fixed_cond;
  if (!held.empty() && !diagonal && draws.scaled()) {
    fixed_cond = condition_on_rest(draws.sigma_structure, held);
  }

  VectorXd acc = VectorXd::Zero(static_cast<Index>(fold.size()));
  VectorXd b(spec.p());
  for (Index s = 0; s < draws.size(); ++s) {
    b = draws.beta.row(s).transpose();
    if (!held.empty()) {
      if (diagonal) {
        for (Index h : held) b(p1 + h) = 0.0;
      } else {
        const ConditionalGaussian cond =
            fixed_cond ? *fixed_cond : condition_on_rest(draws.sigma(s), held);
        const VectorXd theta = b.tail(p2);
        const VectorXd mean_h = cond.coef * select(theta, cond.rest);
        for (std::size_t i = 0; i < held.size(); ++i) {
          b(p1 + held[i]) = mean_h(static_cast<Index>(i));
        }
      }
    }
    acc += xj * b;
  }
  return acc / static_cast<double>(draws.size());
}

CvResult mcv_run(const ModelSpec& spec, const GibbsConfig& cfg, const FoldPlan& plan) {
  cfg.validate(spec.p2());
  CvResult result;
  result.method = Method::mcv;
  result.meta.seed = cfg.seed;
  result.meta.detail = "gibbs S=" + std::to_string(cfg.draws) + " burn_in=" + std::to_string(cfg.burn_in);
  result.folds.resize(plan.size());
  parallel_for(plan.size(), cfg.threads, [&](std::size_t f) {
    auto& rec = result.folds[f];
    rec.fold_id = f;
    rec.rows = plan.folds[f];
    try {
      rec.predicted = mcv_fold(spec, cfg, plan.folds[f], f);
    } catch (const Error& e) {
      throw e.with_fold(f);
    }
  });
  return result;
}

CvResult naive_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan) {
  const VectorXd fit = posterior_mean_fit(draws, spec.design());
  CvResult result;
  result.method = Method::naive;
  result.meta.plug_in = PlugInSource::posterior_mean;
  result.meta.seed = draws.seed;
  result.folds.resize(plan.size());
  for (std::size_t f = 0; f < plan.size(); ++f) {
    result.folds[f].fold_id = f;
    result.folds[f].rows = plan.folds[f];
    result.folds[f].predicted = select(fit, plan.folds[f]);
  }
  return result;
}

}  // namespace axecv
