#pragma once

// Conjugate Gibbs sampler for the Gaussian hierarchical regression, used as
// the manual cross-validation (MCV) ground truth.
//
//   beta | Sigma, tau^2, Y ~ N(V X' P^{-1} Y, V)
//   Sigma | beta           ~ see SigmaPrior
//   tau^2 | beta, Y        ~ IG(a + N/2, b + |Y - X beta|^2 / 2)
//
// Known per-observation variances replace tau^2 I and freeze tau^2 at 1.

#include <cstdint>
#include <optional>
#include <vector>

#include "axecv/cv_result.hpp"
#include "axecv/model.hpp"

namespace axecv {

enum class SigmaPrior {
  /// Sigma = sigma2 * R with R fixed by the model's CovarianceStructure and
  /// sigma2 ~ IW_1(nu, psi) = IG(nu/2, psi/2). The P2 random effects update
  /// it as IW_1(nu + P2, psi + theta' R^{-1} theta).
  scaled,
  /// Unstructured Sigma ~ IW(nu, Psi) on the P2 x P2 block, updated by the
  /// single draw beta2 as IW(nu + 1, Psi + beta2 beta2').
  inverse_wishart,
};

struct GibbsConfig {
  int draws = 4000;
  int burn_in = 1000;
  SigmaPrior sigma_prior = SigmaPrior::scaled;
  double nu = 1.0;
  MatrixXd psi = MatrixXd::Ones(1, 1);
  double a = 0.01;
  double b = 0.01;
  std::uint64_t seed = 1;
  /// Clearing these freezes the parameter at its initial value.
  bool update_sigma = true;
  bool update_tau = true;
  /// Initial tau^2; defaults to the sample variance of Y. Sigma starts at the
  /// model's CovarianceStructure.
  std::optional<double> init_tau2;
  int threads = 1;

  void validate(Index p2) const;
};

struct PosteriorDraws {
  MatrixXd beta;  // S x P
  VectorXd tau2;  // S
  /// Scaled form: Sigma^(s) = sigma_scale(s) * sigma_structure.
  VectorXd sigma_scale;
  MatrixXd sigma_structure;
  /// Full form, one matrix per draw; takes precedence when non-empty.
  std::vector<MatrixXd> sigma_full;
  int burn_in = 0;
  std::uint64_t seed = 0;

  Index size() const { return beta.rows(); }
  Index p() const { return beta.cols(); }
  Index p2() const;
  bool scaled() const { return sigma_full.empty(); }
  MatrixXd sigma(Index s) const;
  /// True when every Sigma^(s) is diagonal.
  bool sigma_diagonal() const;

  void validate() const;
};

PosteriorDraws gibbs_run(const ModelSpec& spec, const GibbsConfig& cfg);

/// Posterior means of Sigma and tau.
VarianceEstimates plug_in_estimates(const PosteriorDraws& draws);

/// Mean over draws of X beta^(s).
VectorXd posterior_mean_fit(const PosteriorDraws& draws, const MatrixXd& design);

/// Refits the sampler on each training fold (seed = cfg.seed + fold id) and
/// predicts the test rows as the mean over draws of X_j beta^(s), with
/// held-out effects replaced by E[theta_h | theta_rest^(s), Sigma^(s)].
CvResult mcv_run(const ModelSpec& spec, const GibbsConfig& cfg, const FoldPlan& plan);

/// One fold of mcv_run.
VectorXd mcv_fold(const ModelSpec& spec, const GibbsConfig& cfg, const IndexSet& fold,
                  std::size_t fold_id);

/// Full-data posterior mean at each fold's rows, no refitting.
CvResult naive_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan);

}  // namespace axecv
