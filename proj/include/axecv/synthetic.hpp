#pragma once

// Seeded synthetic datasets shaped like the study designs.
//
//   eight_schools_scaled  J school means y_j ~ N(mu + theta_j, t_j^2),
//                         theta_j ~ N(0, sigma2), t_j ~ U(t_low, t_high);
//                         response alpha y_j, known variance t_j^2 (not scaled)
//   one_way               y = beta0 + sum_k beta_k x_k + theta_g + e, x_k ~ N(0, 1)
//   cluster_subset        a fixed test cluster plus J - 1 training clusters drawn
//                         from a pool, training size within 10% of the target
//   car_lattice           ring-lattice CAR intercepts, Poisson counts with
//                         exposure E ~ U(offset_low, offset_high)

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "axecv/dataset.hpp"

namespace axecv {

enum class Design { eight_schools_scaled, one_way, cluster_subset, car_lattice };

std::string_view to_string(Design d) noexcept;
Design parse_design(std::string_view s);

struct SyntheticConfig {
  Design design = Design::one_way;
  int J = 8;
  /// One entry for balanced clusters, else one per cluster (cluster_subset:
  /// one per pool cluster, the first being the test cluster).
  std::vector<int> n_per_cluster = {1};
  double alpha_scale = 1.0;
  double rho_test = 0.5;
  /// Training-size target; defaults to test_size / rho_test.
  std::optional<double> target_size;
  int iterations = 60;
  int pool_clusters = 85;
  int test_size = 23;
  /// Defaults to 100 for eight_schools_scaled and 1 otherwise.
  std::optional<double> sigma2;
  double tau2 = 1.0;
  /// Intercept first; further entries add N(0, 1) covariates (one_way).
  std::vector<double> beta = {0.0};
  double t_low = 9.0;
  double t_high = 18.0;
  double car_alpha = 0.9;
  int lattice_reach = 1;
  double offset_low = 5.0;
  double offset_high = 50.0;
  std::uint64_t seed = 1;

  double sigma2_value() const;
  double target() const;
  void validate() const;
};

DatasetFile generate_synthetic(const SyntheticConfig& cfg);

/// Unique multisets (sorted ascending) of `count` sizes drawn from `pool`
/// whose total lies within target +- tolerance * target.
std::vector<std::vector<int>> size_combinations(const std::vector<int>& pool, int count,
                                                double target, double tolerance = 0.1);

/// Up to `iterations` distinct size combinations sampled without
/// replacement with weight 1 / (1 + |total - target|), each realized as a
/// set of pool indices.
std::vector<std::vector<int>> sample_training_subsets(const std::vector<int>& pool, int count,
                                                      double target, int iterations,
                                                      std::mt19937_64& rng);

/// Rows whose `column` equals `value`.
DatasetFile filter_rows(const DatasetFile& data, std::string_view column, double value);

}  // namespace axecv
