#pragma once

// Plug-in cross-validated mean estimates. With Sigma-hat and tau-hat fixed at
// full-data posterior summaries, the held-out mean is the training-data
// conditional posterior mean evaluated at the test rows:
//
//   Yhat_j = X_j (X_{-j}' P_{-j}^{-1} X_{-j} + blockdiag(C^{-1}, Sigma^{-1}))^{-1}
//                X_{-j}' P_{-j}^{-1} Y_{-j}
//
// Poisson-log models are handled by substituting a Gaussian pseudo-response
// on the link scale (see glmm_pseudo_response) before calling these.

#include "axecv/cv_result.hpp"
#include "axecv/model.hpp"

namespace axecv {

enum class AxePath {
  /// Downdate the full-data V (rank-one for identical-row folds, Woodbury
  /// otherwise), falling back to `direct` on a singular downdate.
  automatic,
  /// Factor the training precision for every fold.
  direct,
};

struct AxeOptions {
  AxePath path = AxePath::automatic;
  int threads = 1;
};

VectorXd axe_fold(const ModelSpec& spec, const VarianceEstimates& var, const IndexSet& fold);

CvResult axe_run(const ModelSpec& spec, const VarianceEstimates& var, const FoldPlan& plan,
                 const AxeOptions& opts = {});

// ---------------------------------------------------------------------------
// Poisson-log pseudo-response.

enum class PseudoVariance {
  /// var(log Y) ~ v g'(mu)^2 = 1 / mu, mu the fitted count mean E * lambda.
  delta_method,
  /// v / g'(g^{-1}(eta))^2 taken literally, = mu^3 for Poisson-log.
  printed_display,
};

struct PseudoResponse {
  VectorXd yg;    // log of the fitted rate lambda-hat (offset divided out)
  VectorXd pvar;  // per-observation pseudo-variances
};

/// `fitted_mean` holds the fitted count means E[Y_i | Y]; when it is empty the
/// fit is taken as E * exp(X beta_hat).
PseudoResponse glmm_pseudo_response(const ModelSpec& spec, const VectorXd& beta_hat,
                                    const VectorXd& fitted_mean,
                                    PseudoVariance variant = PseudoVariance::delta_method);

/// Gaussian model on the link scale with known variances `pvar`.
ModelSpec with_pseudo_response(const ModelSpec& spec, const PseudoResponse& pr);

/// Maps link-scale predictions at `rows` back to the response scale.
VectorXd to_response_scale(const ModelSpec& spec, const VectorXd& eta, const IndexSet& rows);

}  // namespace axecv
