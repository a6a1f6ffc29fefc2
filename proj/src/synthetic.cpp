#include "axecv/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "axecv/covariance.hpp"
#include "axecv/error.hpp"

namespace axecv {

std::string_view to_string(Design d) noexcept {
  switch (d) {
    case Design::eight_schools_scaled: return "eight_schools_scaled";
    case Design::one_way: return "one_way";
    case Design::cluster_subset: return "cluster_subset";
    case Design::car_lattice: return "car_lattice";
  }
  return "?";
}

Design parse_design(std::string_view s) {
  for (Design d : {Design::eight_schools_scaled, Design::one_way, Design::cluster_subset,
                   Design::car_lattice}) {
    if (s == to_string(d)) return d;
  }
  fail(Errc::BadConfig, "unknown design '" + std::string(s) +
                            "' (eight_schools_scaled, one_way, cluster_subset, car_lattice)");
}

double SyntheticConfig::sigma2_value() const {
  if (sigma2) return *sigma2;
  return design == Design::eight_schools_scaled ? 100.0 : 1.0;
}

double SyntheticConfig::target() const {
  return target_size ? *target_size : static_cast<double>(test_size) / rho_test;
}

void SyntheticConfig::validate() const {
  if (J < 2) fail(Errc::BadConfig, "need J >= 2");
  if (!(sigma2_value() >= 0.0) || !std::isfinite(sigma2_value())) fail(Errc::BadConfig, "sigma2 must be >= 0");
  if (!(tau2 > 0.0)) fail(Errc::BadConfig, "tau2 must be positive");
  if (!(alpha_scale > 0.0)) fail(Errc::BadConfig, "alpha_scale must be positive");
  if (!(rho_test > 0.0) || !(rho_test < 1.0)) fail(Errc::BadConfig, "rho_test must lie in (0, 1)");
  if (beta.empty()) fail(Errc::BadConfig, "beta needs an intercept entry");
  if (n_per_cluster.empty()) fail(Errc::BadConfig, "n_per_cluster is empty");
  for (int n : n_per_cluster) {
    if (n < 1) fail(Errc::BadConfig, "cluster sizes must be positive");
  }
  if (!(t_low > 0.0) || !(t_high >= t_low)) fail(Errc::BadConfig, "need 0 < t_low <= t_high");
  if (!(offset_low > 0.0) || !(offset_high >= offset_low)) fail(Errc::BadConfig, "need 0 < offset_low <= offset_high");
  if (!(car_alpha >= 0.0) || !(car_alpha < 1.0)) fail(Errc::BadConfig, "car_alpha must lie in [0, 1)");
  if (lattice_reach < 1) fail(Errc::BadConfig, "lattice_reach must be >= 1");
  if (iterations < 1) fail(Errc::BadConfig, "iterations must be >= 1");
  if (target_size && !(*target_size > 0.0)) fail(Errc::BadConfig, "target size must be positive");
  if (test_size < 1) fail(Errc::BadConfig, "test_size must be >= 1");
  if (design == Design::cluster_subset && pool_clusters < J) {
    fail(Errc::BadConfig, "pool must hold at least J clusters");
  }
}

namespace {

std::vector<int> cluster_sizes(const SyntheticConfig& cfg, int count) {
  if (cfg.n_per_cluster.size() == 1) return std::vector<int>(static_cast<std::size_t>(count), cfg.n_per_cluster[0]);
  if (static_cast<int>(cfg.n_per_cluster.size()) != count) {
    fail(Errc::BadConfig, "n_per_cluster needs 1 or " + std::to_string(count) + " entries");
  }
  return cfg.n_per_cluster;
}

VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

DatasetFile eight_schools(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(cfg.t_low, cfg.t_high);
  std::normal_distribution<double> z(0.0, 1.0);
  const double sigma = std::sqrt(cfg.sigma2_value());
  const double mu = cfg.beta[0];
  std::vector<double> t(static_cast<std::size_t>(cfg.J)), theta(t.size()), y(t.size());
  for (auto& v : t) v = unif(rng);
  for (auto& v : theta) v = sigma * z(rng);
  for (std::size_t j = 0; j < t.size(); ++j) y[j] = mu + theta[j] + t[j] * z(rng);

  DatasetFile d;
  std::vector<double> school(t.size()), t2(t.size()), scaled(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    school[j] = static_cast<double>(j + 1);
    t2[j] = t[j] * t[j];
    scaled[j] = cfg.alpha_scale * y[j];
  }
  d.add_column("y", to_vector(scaled), Role::response);
  d.add_column("school", to_vector(school), Role::cluster);
  d.add_column("t2", to_vector(t2), Role::known_variance);
  return d;
}

DatasetFile one_way(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  const auto sizes = cluster_sizes(cfg, cfg.J);
  std::normal_distribution<double> z(0.0, 1.0);
  const double sigma = std::sqrt(cfg.sigma2_value());
  const double tau = std::sqrt(cfg.tau2);
  std::vector<double> theta(static_cast<std::size_t>(cfg.J));
  for (auto& v : theta) v = sigma * z(rng);

  const std::size_t k = cfg.beta.size() - 1;
  std::vector<double> y, g;
  std::vector<std::vector<double>> x(k);
  for (int j = 0; j < cfg.J; ++j) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(j)]; ++i) {
      double mean = cfg.beta[0] + theta[static_cast<std::size_t>(j)];
      for (std::size_t c = 0; c < k; ++c) {
        const double xv = z(rng);
        x[c].push_back(xv);
        mean += cfg.beta[c + 1] * xv;
      }
      y.push_back(mean + tau * z(rng));
      g.push_back(static_cast<double>(j + 1));
    }
  }
  DatasetFile d;
  d.add_column("y", to_vector(y), Role::response);
  for (std::size_t c = 0; c < k; ++c) d.add_column("x" + std::to_string(c + 1), to_vector(x[c]), Role::fixed);
  d.add_column("g", to_vector(g), Role::cluster);
  return d;
}

DatasetFile cluster_subset(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  const int pool_n = cfg.pool_clusters;
  std::vector<int> sizes;
  if (static_cast<int>(cfg.n_per_cluster.size()) == pool_n) {
    sizes = cfg.n_per_cluster;
  } else {
    std::geometric_distribution<int> geo(0.2);
    sizes.push_back(cfg.test_size);
    for (int c = 1; c < pool_n; ++c) sizes.push_back(1 + geo(rng));
  }
  // Population responses, shared by every iteration.
  std::normal_distribution<double> z(0.0, 1.0);
  const double sigma = std::sqrt(cfg.sigma2_value());
  const double tau = std::sqrt(cfg.tau2);
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(pool_n));
  for (int c = 0; c < pool_n; ++c) {
    const double theta = sigma * z(rng);
    for (int i = 0; i < sizes[static_cast<std::size_t>(c)]; ++i) {
      ys[static_cast<std::size_t>(c)].push_back(cfg.beta[0] + theta + tau * z(rng));
    }
  }

  const std::vector<int> pool(sizes.begin() + 1, sizes.end());
  const auto subsets = sample_training_subsets(pool, cfg.J - 1, cfg.target(), cfg.iterations, rng);
  if (subsets.empty()) fail(Errc::BadConfig, "no training combination lies within 10% of the target size");

  std::vector<double> y, county, test, iteration;
  for (std::size_t it = 0; it < subsets.size(); ++it) {
    std::vector<int> members = {0};
    for (int idx : subsets[it]) members.push_back(idx + 1);
    for (int c : members) {
      for (double v : ys[static_cast<std::size_t>(c)]) {
        y.push_back(v);
        county.push_back(static_cast<double>(c + 1));
        test.push_back(c == 0 ? 1.0 : 0.0);
        iteration.push_back(static_cast<double>(it + 1));
      }
    }
  }
  DatasetFile d;
  d.add_column("y", to_vector(y), Role::response);
  d.add_column("county", to_vector(county), Role::cluster);
  d.add_column("test", to_vector(test));
  d.add_column("iteration", to_vector(iteration));
  return d;
}

DatasetFile car_lattice(const SyntheticConfig& cfg, std::mt19937_64& rng) {
  const MatrixXd w = ring_lattice(cfg.J, cfg.lattice_reach);
  const MatrixXd sigma = car_sigma(w, cfg.car_alpha, std::max(cfg.sigma2_value(), 1e-300));
  const MatrixXd l = cholesky(sigma, "CAR Sigma").matrixL();
  std::normal_distribution<double> z(0.0, 1.0);
  VectorXd zz(cfg.J);
  for (Index j = 0; j < cfg.J; ++j) zz(j) = z(rng);
  const VectorXd theta = cfg.sigma2_value() > 0.0 ? VectorXd(l * zz) : VectorXd(VectorXd::Zero(cfg.J));

  const auto sizes = cluster_sizes(cfg, cfg.J);
  std::uniform_real_distribution<double> unif(cfg.offset_low, cfg.offset_high);
  std::vector<double> y, area, e;
  for (int j = 0; j < cfg.J; ++j) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(j)]; ++i) {
      const double exposure = unif(rng);
      std::poisson_distribution<long long> pois(exposure * std::exp(cfg.beta[0] + theta(j)));
      y.push_back(static_cast<double>(pois(rng)));
      area.push_back(static_cast<double>(j + 1));
      e.push_back(exposure);
    }
  }
  DatasetFile d;
  d.add_column("y", to_vector(y), Role::response);
  d.add_column("area", to_vector(area), Role::cluster);
  d.add_column("E", to_vector(e), Role::offset);
  d.adjacency = w;
  return d;
}

}  // namespace

DatasetFile generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  switch (cfg.design) {
    case Design::eight_schools_scaled: return eight_schools(cfg, rng);
    case Design::one_way: return one_way(cfg, rng);
    case Design::cluster_subset: return cluster_subset(cfg, rng);
    case Design::car_lattice: return car_lattice(cfg, rng);
  }
  fail(Errc::BadConfig, "unknown design");
}

std::vector<std::vector<int>> size_combinations(const std::vector<int>& pool, int count,
                                                double target, double tolerance) {
  std::map<int, int> counts;
  for (int s : pool) ++counts[s];
  std::vector<std::pair<int, int>> distinct(counts.begin(), counts.end());
  const double lo = target * (1.0 - tolerance);
  const double hi = target * (1.0 + tolerance);
  const int max_size = distinct.empty() ? 0 : distinct.back().first;

  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  constexpr std::size_t kCap = 200000;
  // Depth-first over distinct sizes in ascending order.
  auto dfs = [&](auto&& self, std::size_t k, int left, long long sum) -> void {
    if (out.size() >= kCap) return;
    if (left == 0) {
      if (sum >= lo && sum <= hi) out.push_back(cur);
      return;
    }
    if (k >= distinct.size()) return;
    if (sum + static_cast<long long>(left) * distinct[k].first > hi) return;
    if (sum + static_cast<long long>(left) * max_size < lo) return;
    const auto [size, avail] = distinct[k];
    for (int take = std::min(avail, left); take >= 0; --take) {
      for (int t = 0; t < take; ++t) cur.push_back(size);
      self(self, k + 1, left - take, sum + static_cast<long long>(take) * size);
      cur.resize(cur.size() - static_cast<std::size_t>(take));
    }
  };
  if (count >= 0) dfs(dfs, 0, count, 0);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> sample_training_subsets(const std::vector<int>& pool, int count,
                                                      double target, int iterations,
                                                      std::mt19937_64& rng) {
  auto combos = size_combinations(pool, count, target);
  std::vector<double> weight;
  for (const auto& c : combos) {
    const double total = std::accumulate(c.begin(), c.end(), 0.0);
    weight.push_back(1.0 / (1.0 + std::abs(total - target)));
  }
  std::map<int, std::vector<int>> by_size;
  for (std::size_t i = 0; i < pool.size(); ++i) by_size[pool[i]].push_back(static_cast<int>(i));

  std::vector<std::vector<int>> out;
  while (static_cast<int>(out.size()) < iterations && !combos.empty()) {
    std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
    const std::size_t k = pick(rng);
    std::map<int, int> need;
    for (int s : combos[k]) ++need[s];
    std::vector<int> members;
    for (const auto& [size, m] : need) {
      std::vector<int> cand = by_size[size];
      std::shuffle(cand.begin(), cand.end(), rng);
      members.insert(members.end(), cand.begin(), cand.begin() + m);
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
    combos.erase(combos.begin() + static_cast<std::ptrdiff_t>(k));
    weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

DatasetFile filter_rows(const DatasetFile& data, std::string_view column, double value) {
  data.validate();
  const VectorXd& key = data.column(column);
  IndexSet rows;
  for (Index r = 0; r < key.size(); ++r) {
    if (key(r) == value) rows.push_back(r);
  }
  DatasetFile out;
  out.adjacency = data.adjacency;
  for (std::size_t c = 0; c < data.names.size(); ++c) {
    out.add_column(data.names[c], select(data.columns[c], rows), data.roles.at(data.names[c]));
  }
  return out;
}

}  // namespace axecv
