#pragma once

// Role-based model construction from tabular data.
//
//   response        Y (exactly one)
//   fixed           columns of X1; an intercept is prepended unless one of
//                   them is identically 1
//   cluster         integer codes, each column one-hot encoded into X2
//   offset          exposure E (Poisson-log)
//   known_variance  per-row variances replacing tau^2 I
//   ignore          carried along, not used

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "axecv/model.hpp"

namespace axecv {

enum class Role { response, fixed, cluster, offset, known_variance, ignore };

std::string_view to_string(Role r) noexcept;
Role parse_role(std::string_view s);

struct DatasetFile {
  std::vector<std::string> names;
  std::vector<VectorXd> columns;
  std::map<std::string, Role> roles;
  /// Cluster adjacency for CAR structures, when the generator made one.
  std::optional<MatrixXd> adjacency;

  Index rows() const { return columns.empty() ? 0 : columns.front().size(); }
  const VectorXd& column(std::string_view name) const;
  void add_column(std::string name, VectorXd values, Role role = Role::ignore);
  /// Throws DimensionMismatch on unequal column lengths.
  void validate() const;
};

/// "y=response,x=fixed,g=cluster"
std::map<std::string, Role> parse_roles(std::string_view spec);

/// Columns named in `roles` get those roles; the rest are ignored.
DatasetFile load_dataset(const std::string& path, const std::map<std::string, Role>& roles);
void save_dataset(const std::string& path, const DatasetFile& data, std::uint64_t seed);

struct BuildOptions {
  Family family = Family::gaussian;
  /// Flat prior on the fixed effects, else N(0, prior_variance I).
  bool prior_infinite = true;
  double prior_variance = 1e4;
  CovKind cov_kind = CovKind::diagonal;
  /// Starting scale for Sigma = sigma2 R.
  double sigma2 = 1.0;
  double alpha = 0.0;
  double rho = 0.0;
  int periods = 1;
  /// Required for car and st_car. Cluster codes 1..J index its nodes
  /// (st_car: code (t-1) J + node).
  std::optional<MatrixXd> adjacency;
};

struct BuiltModel {
  ModelSpec spec;
  /// Codes of the first cluster column, for leave-cluster-out plans.
  std::optional<std::vector<long long>> cluster_labels;
  std::vector<std::string> x1_names;
  std::vector<std::string> x2_names;
};

BuiltModel build_model(const DatasetFile& data, const BuildOptions& opts = {});

/// Undirected edge list, one "i j" pair per line (1-based); '#' comments.
MatrixXd read_edge_list(const std::string& path, std::optional<Index> nodes = std::nullopt);
MatrixXd parse_edge_list(std::istream& in, std::string_view source,
                         std::optional<Index> nodes = std::nullopt);
void write_edge_list(const std::string& path, const MatrixXd& adjacency);

}  // namespace axecv
