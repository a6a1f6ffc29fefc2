#include "axecv/psis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "axecv/error.hpp"

namespace axecv {

namespace {

void require_finite(const VectorXd& log_w) {
  for (Index i = 0; i < log_w.size(); ++i) {
    if (!std::isfinite(log_w(i))) {
      fail(Errc::NonFiniteLogDensity, "log weight " + std::to_string(i + 1) + " is not finite");
    }
  }
}

}  // namespace

GpdFit gpd_fit(VectorXd x) {
  const Index n = x.size();
  if (n < 1) fail(Errc::TailFitFailure, "no exceedances to fit");
  std::sort(x.data(), x.data() + n);
  if (!(x(0) >= 0.0) || !(x(n - 1) > 0.0)) fail(Errc::TailFitFailure, "exceedances must be positive");

  const Index m = 30 + static_cast<Index>(std::floor(std::sqrt(static_cast<double>(n))));
  const Index q = std::max<Index>(1, static_cast<Index>(std::floor(n / 4.0 + 0.5)));
  const double xq = x(q - 1);
  if (!(xq > 0.0)) fail(Errc::TailFitFailure, "first quartile of exceedances is zero");
  const double prior = 3.0;

  VectorXd theta(m), l(m);
  for (Index j = 0; j < m; ++j) {
    theta(j) = 1.0 / x(n - 1) +
               (1.0 - std::sqrt(static_cast<double>(m) / (static_cast<double>(j + 1) - 0.5))) /
                   (prior * xq);
    const double a = -theta(j);
    double k = 0.0;
    for (Index i = 0; i < n; ++i) k += std::log1p(a * x(i));
    k /= static_cast<double>(n);
    l(j) = static_cast<double>(n) * (std::log(a / k) - k - 1.0);
  }
  double theta_hat = 0.0;
  for (Index j = 0; j < m; ++j) {
    const double w = 1.0 / (l.array() - l(j)).exp().sum();
    if (std::isfinite(w)) theta_hat += theta(j) * w;
  }
  if (!std::isfinite(theta_hat) || theta_hat == 0.0) fail(Errc::TailFitFailure, "shape fit diverged");

  double k = 0.0;
  for (Index i = 0; i < n; ++i) k += std::log1p(-theta_hat * x(i));
  k /= static_cast<double>(n);
  GpdFit fit;
  fit.sigma = -k / theta_hat;
  const double nd = static_cast<double>(n);
  fit.k = (nd * k + 10.0 * 0.5) / (nd + 10.0);
  if (!std::isfinite(fit.k) || !(fit.sigma > 0.0)) fail(Errc::TailFitFailure, "degenerate GPD fit");
  return fit;
}

double gpd_quantile(double p, double k, double sigma) {
  if (k == 0.0) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

ImportanceWeights raw_weights(const VectorXd& log_w) {
  if (log_w.size() < 1) fail(Errc::DegenerateWeights, "no importance weights");
  require_finite(log_w);
  ImportanceWeights out;
  out.log_w = log_w;
  const double mx = log_w.maxCoeff();
  out.normalized = (log_w.array() - mx).exp();
  out.normalized /= out.normalized.sum();
  return out;
}

ImportanceWeights psis_smooth(const VectorXd& log_w, double tail_fraction) {
  const Index s = log_w.size();
  if (s < 5) fail(Errc::TailFitFailure, "Pareto smoothing needs at least 5 weights");
  if (!(tail_fraction > 0.0) || !(tail_fraction < 1.0)) {
    fail(Errc::InvalidArgument, "tail fraction must lie in (0, 1)");
  }
  require_finite(log_w);
  ImportanceWeights out = raw_weights(log_w);

  const Index m = std::min<Index>(
      s - 1, static_cast<Index>(std::ceil(tail_fraction * static_cast<double>(s))));
  std::vector<Index> order(static_cast<std::size_t>(s));
  std::iota(order.begin(), order.end(), Index{0});
  // Stable so ties keep index order and the output is deterministic.
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return log_w(a) < log_w(b); });

  const double mx = log_w.maxCoeff();
  const double cutoff = std::exp(log_w(order[static_cast<std::size_t>(s - m - 1)]) - mx);
  VectorXd exceed(m);
  for (Index r = 0; r < m; ++r) {
    exceed(r) = std::exp(log_w(order[static_cast<std::size_t>(s - m + r)]) - mx) - cutoff;
  }
  if (!(exceed.maxCoeff() > 0.0) || exceed.minCoeff() == exceed.maxCoeff()) return out;

  GpdFit fit;
  try {
    fit = gpd_fit(exceed);
  } catch (const Error&) {
    return out;
  }

  VectorXd w = (log_w.array() - mx).exp();
  for (Index r = 0; r < m; ++r) {
    const double p = (static_cast<double>(r + 1) - 0.5) / static_cast<double>(m);
    const double smoothed = std::min(1.0, gpd_quantile(p, fit.k, fit.sigma) + cutoff);
    w(order[static_cast<std::size_t>(s - m + r)]) = smoothed;
  }
  out.normalized = w / w.sum();
  out.khat = fit.k;
  out.smoothed = true;
  return out;
}

double effective_sample_size(const VectorXd& normalized) {
  return 1.0 / normalized.squaredNorm();
}

}  // namespace axecv
