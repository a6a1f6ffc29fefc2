// Acceptance checks. One line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "axecv/axe.hpp"
#include "axecv/baselines.hpp"
#include "axecv/covariance.hpp"
#include "axecv/dataset.hpp"
#include "axecv/diagnostics.hpp"
#include "axecv/gibbs.hpp"
#include "axecv/psis.hpp"
#include "axecv/synthetic.hpp"
#include "axecv/variance_posterior.hpp"
#include "oracles.hpp"

using namespace axecv;

namespace {

// Tolerances and limits.
constexpr double kIdentityRel = 1e-8;
constexpr double kEigenFloor = -1e-10;
constexpr double kFastDirectAbs = 1e-8;
constexpr double kMcSe = 3.0;
constexpr double kConvergedAt80 = 0.05;
constexpr double kAxeLrrBound = 0.2;
constexpr double kCollapseAbs = 1e-10;
constexpr double kKhatWindow = 0.15;
constexpr double kDoublingFactor = 10.0;
constexpr double kAxeVsMcv = 1.0 / 20.0;
constexpr double kCovAbs = 1e-10;
constexpr double kDegenerateAbs = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class Fn>
double best_time(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1. Downdate identities on random instances.
Outcome identities() {
  double worst_rel = 0, worst_eig2 = 1e300, worst_eig3 = 1e300;
  Index max_n = 0, max_p = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto li = oracle::downdate_instance(seed);
    max_n = std::max(max_n, li.spec.n());
    max_p = std::max(max_p, li.spec.p());
    const auto e = oracle::downdate_errors(li);
    worst_rel = std::max({worst_rel, e.item1, e.item4, e.item5, e.item6});
    worst_eig2 = std::min(worst_eig2, e.item2);
    worst_eig3 = std::min(worst_eig3, 1.0 - e.item3);
  }
  Outcome o;
  o.pass = worst_rel < kIdentityRel && worst_eig2 >= kEigenFloor && worst_eig3 >= kEigenFloor && max_n <= 60 &&
           max_p <= 12;
  o.detail = "200 instances, max N " + std::to_string(max_n) + ", max P " + std::to_string(max_p) +
             fmt(", worst relative error %.2e", worst_rel) + fmt(", min eig(V_-j - V) %.2e", worst_eig2) +
             fmt(", min 1 - w nu %.2e", worst_eig3);
  return o;
}

// 2. Fast path against direct factorization.
Outcome fast_vs_direct() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> jd(2, 12), nd(1, 8), cd(0, 3);
  std::uniform_real_distribution<double> vd(0.2, 3.0);
  double worst = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int j = jd(rng), n = nd(rng), c = cd(rng);
    const double s2 = vd(rng), t2 = vd(rng);
    auto ow = oracle::one_way(j, n + 1, s2, t2, 1000 + static_cast<std::uint64_t>(rep), c);
    const auto plan = build_fold_plan(rep % 2 ? FoldScheme::loo : FoldScheme::lco, ow.spec.n(), ow.labels);
    VarianceEstimates var;
    var.sigma = vd(rng) * MatrixXd::Identity(j, j);
    var.tau = std::sqrt(vd(rng));
    AxeOptions fast, direct;
    direct.path = AxePath::direct;
    const auto a = axe_run(ow.spec, var, plan, fast);
    const auto b = axe_run(ow.spec, var, plan, direct);
    for (std::size_t f = 0; f < plan.size(); ++f) {
      worst = std::max(worst, (a.folds[f].predicted - b.folds[f].predicted).cwiseAbs().maxCoeff());
    }
  }
  return {worst < kFastDirectAbs, fmt("50 models, max |fast - direct| %.2e", worst)};
}

// 3. Gibbs with frozen variances against the closed-form mean.
Outcome gibbs_closed_form() {
  auto ow = oracle::one_way(10, 10, 1.0, 1.0, 3);
  GibbsConfig cfg;
  cfg.draws = 4000;
  cfg.burn_in = 100;
  cfg.update_sigma = false;
  cfg.update_tau = false;
  cfg.init_tau2 = 1.0;
  cfg.seed = 3;
  const auto draws = gibbs_run(ow.spec, cfg);
  const MatrixXd x = ow.spec.design();
  const MatrixXd v = oracle::inverse(oracle::mul(oracle::t(x), x) +
                                     oracle::prior_precision(ow.spec, MatrixXd::Identity(10, 10)));
  const VectorXd expect = oracle::mul(x, oracle::mul(v, oracle::mul(oracle::t(x), ow.spec.response)));
  const MatrixXd fits = draws.beta * x.transpose();
  double worst = 0;
  for (Index r = 0; r < x.rows(); ++r) {
    const double m = fits.col(r).mean();
    const double sd = std::sqrt((fits.col(r).array() - m).square().sum() / static_cast<double>(fits.rows() - 1));
    worst = std::max(worst, std::abs(m - expect(r)) / (sd / std::sqrt(static_cast<double>(fits.rows()))));
  }
  return {worst < kMcSe, fmt("J=10, N=100, S=4000, max |error| / SE %.2f", worst)};
}

// 4. Drop-one-cluster maximizer converges to the full-data one.
Outcome variance_convergence() {
  const std::vector<int> js = {5, 10, 20, 40, 80};
  std::vector<double> med;
  bool all_converged = true;
  for (int j : js) {
    SyntheticConfig sc;
    sc.design = Design::one_way;
    sc.J = j;
    sc.n_per_cluster = {5};
    sc.sigma2 = 1.0;
    sc.tau2 = 1.0;
    sc.seed = 7;
    const BuiltModel bm = build_model(generate_synthetic(sc));
    const auto full = maximize_variance_likelihood(VarianceLikelihood(bm.spec), 1.0, 1.0);
    all_converged = all_converged && full.converged;
    const auto plan = build_fold_plan(FoldScheme::lco, bm.spec.n(), bm.cluster_labels);
    std::vector<double> dist;
    for (const auto& fold : plan.folds) {
      const auto m = maximize_variance_likelihood(VarianceLikelihood(bm.spec, fold), full.sigma2, full.tau2);
      all_converged = all_converged && m.converged;
      dist.push_back(std::hypot(m.sigma2 - full.sigma2, m.tau2 - full.tau2));
    }
    med.push_back(median(dist));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < med.size(); ++i) monotone = monotone && med[i] <= med[i - 1];
  std::string d = "median distance by J:";
  for (std::size_t i = 0; i < js.size(); ++i) d += " " + std::to_string(js[i]) + fmt("=%.4f", med[i]);
  d += all_converged ? "" : " (some maximizations hit the iteration cap)";
  return {monotone && med.back() < kConvergedAt80 && all_converged, d};
}

// 5. Scaled eight-schools data: AXE stays close to MCV while the
// no-refit predictor drifts as alpha grows.
Outcome eight_schools_trend() {
  const std::vector<double> alphas = {0.5, 1.0, 2.0, 4.0};
  const int replicates = 5;
  std::vector<double> axe_mean, naive_mean;
  for (double alpha : alphas) {
    std::vector<LrrReport> axe_reps, naive_reps;
    for (int r = 1; r <= replicates; ++r) {
      SyntheticConfig sc;
      sc.design = Design::eight_schools_scaled;
      sc.J = 8;
      sc.alpha_scale = alpha;
      sc.seed = static_cast<std::uint64_t>(r);
      const BuiltModel bm = build_model(generate_synthetic(sc));
      const auto plan = build_fold_plan(FoldScheme::lco, bm.spec.n(), bm.cluster_labels);
      GibbsConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(100 + r);
      const auto draws = gibbs_run(bm.spec, cfg);
      const auto mcv = mcv_run(bm.spec, cfg, plan);
      const auto axe = axe_run(bm.spec, plug_in_estimates(draws), plan);
      const auto naive = naive_run(draws, bm.spec, plan);
      axe_reps.push_back(lrr(axe, mcv, bm.spec, plan));
      naive_reps.push_back(lrr(naive, mcv, bm.spec, plan));
    }
    axe_mean.push_back(summarize_lrr(axe_reps).front().mean);
    naive_mean.push_back(summarize_lrr(naive_reps).front().mean);
  }
  bool axe_ok = true, naive_grows = true;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    axe_ok = axe_ok && std::abs(axe_mean[i]) < kAxeLrrBound;
    if (i > 0) naive_grows = naive_grows && std::abs(naive_mean[i]) > std::abs(naive_mean[i - 1]);
  }
  const bool beats = std::abs(naive_mean.back()) > std::abs(axe_mean.back());
  std::string d = "mean LRR axe/naive by alpha:";
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    d += fmt(" %.1f=", alphas[i]) + fmt("%.3f", axe_mean[i]) + fmt("/%.3f", naive_mean[i]);
  }
  return {axe_ok && naive_grows && beats, d};
}

// 6. iIS-A with constant hyperparameters reproduces AXE.
Outcome iis_a_collapse() {
  double worst = 0;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto ow = oracle::one_way(6, 3, 1.0, 1.0, seed, 2);
    const bool car = seed % 2 == 0;
    const MatrixXd structure = car ? car_sigma(ring_lattice(6, 1), 0.8, 1.0) : MatrixXd(MatrixXd::Identity(6, 6));
    if (car) ow.spec.cov = CovarianceStructure::car(ring_lattice(6, 1), 0.8, 1.0);
    PosteriorDraws d;
    d.beta.resize(40, ow.spec.p());
    for (Index i = 0; i < d.beta.size(); ++i) d.beta.data()[i] = z(rng);
    d.tau2 = VectorXd::Constant(40, 0.6);
    d.sigma_scale = VectorXd::Constant(40, 1.4);
    d.sigma_structure = structure;
    VarianceEstimates var;
    var.sigma = 1.4 * structure;
    var.tau = std::sqrt(0.6);
    const auto plan = build_fold_plan(FoldScheme::lco, ow.spec.n(), ow.labels);
    for (const auto& fold : plan.folds) {
      const auto est = iis_a(d, ow.spec, fold);
      worst = std::max(worst, (est.predicted - axe_fold(ow.spec, var, fold)).cwiseAbs().maxCoeff());
    }
  }
  return {worst < kCollapseAbs, fmt("diagonal and CAR Sigma, max |iIS-A - AXE| %.2e", worst)};
}

// 7. PSIS on log weights with a GPD(k, 1) tail.
Outcome psis_consistency() {
  double worst_k = 0;
  bool props = true;
  for (double k : {0.1, 0.3, 0.5}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      std::mt19937_64 rng(seed * 97 + static_cast<std::uint64_t>(k * 10));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      VectorXd lw(4000);
      for (Index i = 0; i < lw.size(); ++i) lw(i) = std::log((std::pow(1.0 - u(rng), -k) - 1.0) / k);
      const auto w = psis_smooth(lw);
      worst_k = std::max(worst_k, std::abs(w.khat - k));
      std::vector<Index> order(static_cast<std::size_t>(lw.size()));
      for (Index i = 0; i < lw.size(); ++i) order[static_cast<std::size_t>(i)] = i;
      std::sort(order.begin(), order.end(), [&](Index a, Index b) { return lw(a) < lw(b); });
      for (std::size_t i = 1; i < order.size(); ++i) props = props && w.normalized(order[i - 1]) <= w.normalized(order[i]);
      props = props && w.normalized.minCoeff() >= 0.0 && std::abs(w.normalized.sum() - 1.0) < 1e-12;
      // cap: relative to the smallest (untouched) weight, no smoothed weight
      // exceeds the largest raw weight
      const Index lo = order.front(), hi = order.back();
      props = props && w.normalized.maxCoeff() / w.normalized(lo) <= std::exp(lw(hi) - lw(lo)) * (1 + 1e-12);
    }
  }
  return {worst_k <= kKhatWindow && props,
          fmt("max |khat - k| %.3f", worst_k) + (props ? ", order/sign/sum/cap hold" : ", a weight property fails")};
}

// 8. Timing.
Outcome complexity() {
  AxeOptions one;
  one.threads = 1;
  auto per_fold = [&](int covariates) {
    auto ow = oracle::one_way(40, 10, 1.0, 1.0, 8, covariates);
    const auto plan = build_fold_plan(FoldScheme::lco, ow.spec.n(), ow.labels);
    VarianceEstimates var;
    var.sigma = MatrixXd::Identity(40, 40);
    var.tau = 1.0;
    const double t = best_time(5, [&] { axe_run(ow.spec, var, plan, one); });
    return std::make_pair(t / static_cast<double>(plan.size()), ow.spec.p());
  };
  const auto [t45, p45] = per_fold(4);
  const auto [t90, p90] = per_fold(49);
  const double growth = t90 / t45;

  auto big = oracle::one_way(80, 5, 1.0, 1.0, 9, 9);
  const auto plan = build_fold_plan(FoldScheme::lco, big.spec.n(), big.labels);
  GibbsConfig cfg;
  cfg.draws = 4000;
  cfg.burn_in = 1000;
  cfg.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto draws = gibbs_run(big.spec, cfg);
  const auto var = plug_in_estimates(draws);
  const double fit_time = seconds_since(t0);
  const double axe_time = best_time(3, [&] { axe_run(big.spec, var, plan, one); });
  const double mcv_time = best_time(1, [&] { mcv_run(big.spec, cfg, plan); });
  const double ratio = axe_time / mcv_time;
  std::string d = "per-fold AXE P=" + std::to_string(p45) + " -> " + std::to_string(p90) + fmt(" x%.2f", growth) +
                  "; J=80 N=400 P=" + std::to_string(big.spec.p()) + fmt(": AXE %.4f s", axe_time) +
                  fmt(", MCV %.1f s", mcv_time) + fmt(", ratio %.2e", ratio) + fmt(" (full fit %.1f s)", fit_time);
  return {growth <= kDoublingFactor && ratio < kAxeVsMcv && big.spec.p() == 90, d};
}

// 9. Covariance builders against dense inversion.
Outcome covariance_builders() {
  std::mt19937_64 rng(9);
  double worst = 0, worst_degenerate = 0;
  for (Index j = 2; j <= 6; ++j) {
    const MatrixXd w = oracle::random_graph(j, rng);
    for (double alpha : {0.0, 0.4, 0.95}) {
      MatrixXd prec = -alpha * w;
      for (Index a = 0; a < j; ++a) prec(a, a) += w.row(a).sum();
      worst = std::max(worst, (car_sigma(w, alpha, 1.3) - 1.3 * oracle::inverse(prec)).cwiseAbs().maxCoeff());
      for (int t = 1; t <= 3; ++t) {
        for (double rho : {-0.5, 0.0, 0.7}) {
          const MatrixXd got = st_car_sigma(w, alpha, rho, 0.8, t);
          worst = std::max(worst, (got - oracle::st_covariance(w, alpha, rho, 0.8, t)).cwiseAbs().maxCoeff());
        }
      }
      // rho = 0: block diagonal copies of the spatial covariance; T = 1: spatial only
      const MatrixXd spatial = 0.8 * oracle::inverse(leroux_precision(w, alpha));
      const MatrixXd three = st_car_sigma(w, alpha, 0.0, 0.8, 3);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const MatrixXd blk = three.block(a * j, b * j, j, j);
          worst_degenerate = std::max(worst_degenerate, (a == b ? MatrixXd(blk - spatial) : blk).cwiseAbs().maxCoeff());
        }
      worst_degenerate =
          std::max(worst_degenerate, (st_car_sigma(w, alpha, 0.6, 0.8, 1) - spatial).cwiseAbs().maxCoeff());
    }
  }
  return {worst < kCovAbs && worst_degenerate < kDegenerateAbs,
          fmt("max |builder - oracle| %.2e", worst) + fmt(", degeneracies %.2e", worst_degenerate)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "downdate identities", 10, identities},
      {2, "fast path equals direct", 10, fast_vs_direct},
      {3, "Gibbs closed-form mean", 60, gibbs_closed_form},
      {4, "variance maximizer convergence", 300, variance_convergence},
      {5, "scaled eight-schools trend", 600, eight_schools_trend},
      {6, "iIS-A collapse to AXE", 5, iis_a_collapse},
      {7, "PSIS self-consistency", 10, psis_consistency},
      {8, "complexity", 600, complexity},
      {9, "covariance builders", 5, covariance_builders},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("criterion %d %s: %s | %s | %.2f s (limit %.0f s)%s\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " over time");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
