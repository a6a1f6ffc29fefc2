#pragma once

// Posterior-draw based leave-cluster-out approximations.
//
// Split the linear predictor at the test rows into the part informed by the
// training data and the held-out effects theta_h (random-effect columns used
// only by test rows):
//
//   X_j beta = mu_j + X_jh theta_h
//   theta_h | theta_rest, Sigma ~ N(a, M)
//
// GHOST   averages mu_j + X_jh theta~ with theta~ drawn from N(a, M).
// iIS-C   weights draw s by 1 / N(Y_j; mu_j + X_jh a, P_j + X_jh M X_jh').
// iIS-A   weights draw s by 1 / N(Y_j; X_j V_-j X_-j' P_-j^{-1} Y_-j, P_j + X_j V_-j X_j')
//         with V_-j built from (Sigma^(s), tau^(s)).
//
// Poisson-log models use the Gaussian pseudo-response built from the draws'
// fitted means for every likelihood term; estimates are averaged on the link
// scale and mapped back through E exp(.).

#include <cstdint>

#include "axecv/cv_result.hpp"
#include "axecv/gibbs.hpp"
#include "axecv/model.hpp"
#include "axecv/psis.hpp"

namespace axecv {

/// count x |held| draws of theta_h | theta_rest, Sigma. `held` indexes Sigma;
/// theta_rest follows the complement's order.
MatrixXd ghost_draws(const VectorXd& theta_rest, const MatrixXd& sigma, const IndexSet& held,
                     int count, std::uint64_t seed);

VectorXd ghost_estimate(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold,
                        std::uint64_t seed = 0);

struct ImportanceOptions {
  bool psis = true;
  double tail_fraction = 0.2;
  /// Integrate theta_h by simulation instead of the closed form.
  bool monte_carlo_theta = false;
  int mc_theta_draws = 200;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ImportanceEstimate {
  ImportanceWeights weights;
  VectorXd predicted;
  double ess = 0.0;
};

/// Normalizes (and optionally smooths) log weights, then averages the rows
/// of `values` (S x n_j). Throws DegenerateWeights when S >= 2 and ESS < 2.
ImportanceEstimate self_normalized(const VectorXd& log_w, const MatrixXd& values,
                                   const ImportanceOptions& opts);

ImportanceEstimate iis_c(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold,
                         const ImportanceOptions& opts = {});

ImportanceEstimate iis_a(const PosteriorDraws& draws, const ModelSpec& spec, const IndexSet& fold,
                         const ImportanceOptions& opts = {});

/// Per-fold runners; fold f uses seed + f.
CvResult ghost_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan,
                   std::uint64_t seed = 0, int threads = 1);
CvResult iis_c_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan,
                   const ImportanceOptions& opts = {});
CvResult iis_a_run(const PosteriorDraws& draws, const ModelSpec& spec, const FoldPlan& plan,
                   const ImportanceOptions& opts = {});

/// The Gaussian model whose likelihood the importance methods use: `spec`
/// itself, or its pseudo-response built from the draws for Poisson-log.
ModelSpec likelihood_model(const PosteriorDraws& draws, const ModelSpec& spec);

}  // namespace axecv
