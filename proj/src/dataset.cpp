#include "axecv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "axecv/csv.hpp"
#include "axecv/error.hpp"

namespace axecv {

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::response: return "response";
    case Role::fixed: return "fixed";
    case Role::cluster: return "cluster";
    case Role::offset: return "offset";
    case Role::known_variance: return "known_variance";
    case Role::ignore: return "ignore";
  }
  return "?";
}

Role parse_role(std::string_view s) {
  for (Role r : {Role::response, Role::fixed, Role::cluster, Role::offset, Role::known_variance,
                 Role::ignore}) {
    if (s == to_string(r)) return r;
  }
  fail(Errc::RoleError, "unknown role '" + std::string(s) +
                            "' (response, fixed, cluster, offset, known_variance, ignore)");
}

const VectorXd& DatasetFile::column(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return columns[i];
  }
  fail(Errc::RoleError, "no column named '" + std::string(name) + "'");
}

void DatasetFile::add_column(std::string name, VectorXd values, Role role) {
  for (const auto& n : names) {
    if (n == name) fail(Errc::InvalidArgument, "duplicate column '" + name + "'");
  }
  roles[name] = role;
  names.push_back(std::move(name));
  columns.push_back(std::move(values));
}

void DatasetFile::validate() const {
  if (names.size() != columns.size()) fail(Errc::DimensionMismatch, "column names and data differ");
  for (const auto& c : columns) {
    if (c.size() != rows()) fail(Errc::DimensionMismatch, "columns have unequal lengths");
  }
}

std::map<std::string, Role> parse_roles(std::string_view spec) {
  std::map<std::string, Role> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t end = std::min(spec.find(',', pos), spec.size());
    const std::string_view item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      fail(Errc::RoleError, "role entry '" + std::string(item) + "' is not column=role");
    }
    auto trim = [](std::string_view s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string_view::npos ? std::string() : std::string(s.substr(b, e - b + 1));
    };
    out[trim(item.substr(0, eq))] = parse_role(trim(item.substr(eq + 1)));
  }
  return out;
}

DatasetFile load_dataset(const std::string& path, const std::map<std::string, Role>& roles) {
  const CsvTable t = read_csv_file(path);
  DatasetFile d;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    VectorXd v(static_cast<Index>(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      v(static_cast<Index>(r)) = parse_double(t.rows[r][c], path, t.lines[r]);
    }
    const auto it = roles.find(t.header[c]);
    d.add_column(t.header[c], std::move(v), it == roles.end() ? Role::ignore : it->second);
  }
  for (const auto& [name, role] : roles) {
    if (!t.has_column(name)) fail(Errc::RoleError, "role given for missing column '" + name + "'");
  }
  return d;
}

void save_dataset(const std::string& path, const DatasetFile& data, std::uint64_t seed) {
  data.validate();
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  write_preamble(out, seed);
  std::string roles;
  for (const auto& n : data.names) {
    const Role r = data.roles.at(n);
    if (r == Role::ignore) continue;
    roles += (roles.empty() ? "" : ",") + n + "=" + std::string(to_string(r));
  }
  out << "# roles " << roles << '\n';
  for (std::size_t c = 0; c < data.names.size(); ++c) out << (c ? "," : "") << data.names[c];
  out << '\n';
  for (Index r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      out << (c ? "," : "") << format_double(data.columns[c](r));
    }
    out << '\n';
  }
  if (!out) fail(Errc::IoError, "failed writing " + path);
}

BuiltModel build_model(const DatasetFile& data, const BuildOptions& opts) {
  data.validate();
  const Index n = data.rows();
  std::vector<std::size_t> fixed, cluster;
  std::optional<std::size_t> response, offset, known;
  for (std::size_t c = 0; c < data.names.size(); ++c) {
    const auto it = data.roles.find(data.names[c]);
    const Role role = it == data.roles.end() ? Role::ignore : it->second;
    auto single = [&](std::optional<std::size_t>& slot) {
      if (slot) fail(Errc::RoleError, "more than one " + std::string(to_string(role)) + " column");
      slot = c;
    };
    switch (role) {
      case Role::response: single(response); break;
      case Role::fixed: fixed.push_back(c); break;
      case Role::cluster: cluster.push_back(c); break;
      case Role::offset: single(offset); break;
      case Role::known_variance: single(known); break;
      case Role::ignore: break;
    }
  }
  if (!response) fail(Errc::RoleError, "no response column");
  if (cluster.empty()) fail(Errc::RoleError, "no cluster column; the model needs random effects");

  BuiltModel bm;
  ModelSpec& spec = bm.spec;
  spec.family = opts.family;
  spec.response = data.columns[*response];

  bool has_intercept = false;
  for (std::size_t c : fixed) {
    if ((data.columns[c].array() == 1.0).all()) has_intercept = true;
  }
  const Index p1 = static_cast<Index>(fixed.size()) + (has_intercept ? 0 : 1);
  spec.x1.resize(n, p1);
  Index col = 0;
  if (!has_intercept) {
    spec.x1.col(col++).setOnes();
    bm.x1_names.push_back("(intercept)");
  }
  for (std::size_t c : fixed) {
    spec.x1.col(col++) = data.columns[c];
    bm.x1_names.push_back(data.names[c]);
  }
  spec.prior_infinite = opts.prior_infinite;
  spec.prior_cov = opts.prior_variance * MatrixXd::Identity(p1, p1);

  const bool structured = opts.cov_kind != CovKind::diagonal;
  if (structured && cluster.size() != 1) {
    fail(Errc::RoleError, "CAR structures need exactly one cluster column");
  }
  if (structured && !opts.adjacency) fail(Errc::InvalidArgument, "CAR structures need an adjacency");

  std::vector<MatrixXd> blocks;
  for (std::size_t c : cluster) {
    const VectorXd& v = data.columns[c];
    std::vector<long long> codes(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
      if (!std::isfinite(v(r)) || v(r) != std::round(v(r))) {
        fail(Errc::RoleError, "cluster column '" + data.names[c] + "' has non-integer value at row " +
                                  std::to_string(r + 1));
      }
      codes[static_cast<std::size_t>(r)] = static_cast<long long>(v(r));
    }
    std::vector<long long> levels;
    if (structured) {
      const long long dim = static_cast<long long>(opts.adjacency->rows()) *
                            (opts.cov_kind == CovKind::st_car ? opts.periods : 1);
      for (long long l = 1; l <= dim; ++l) levels.push_back(l);
      for (long long code : codes) {
        if (code < 1 || code > dim) {
          fail(Errc::RoleError, "cluster code " + std::to_string(code) + " outside 1.." + std::to_string(dim));
        }
      }
    } else {
      levels = codes;
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    }
    MatrixXd block = MatrixXd::Zero(n, static_cast<Index>(levels.size()));
    for (Index r = 0; r < n; ++r) {
      const auto pos = std::lower_bound(levels.begin(), levels.end(), codes[static_cast<std::size_t>(r)]);
      block(r, pos - levels.begin()) = 1.0;
    }
    for (long long l : levels) bm.x2_names.push_back(data.names[c] + "=" + std::to_string(l));
    blocks.push_back(std::move(block));
    if (!bm.cluster_labels) bm.cluster_labels = codes;
  }
  Index p2 = 0;
  for (const auto& b : blocks) p2 += b.cols();
  spec.x2.resize(n, p2);
  col = 0;
  for (const auto& b : blocks) {
    spec.x2.middleCols(col, b.cols()) = b;
    col += b.cols();
  }

  switch (opts.cov_kind) {
    case CovKind::diagonal: spec.cov = CovarianceStructure::diagonal(p2, opts.sigma2); break;
    case CovKind::car: spec.cov = CovarianceStructure::car(*opts.adjacency, opts.alpha, opts.sigma2); break;
    case CovKind::st_car:
      spec.cov = CovarianceStructure::st_car(*opts.adjacency, opts.alpha, opts.rho, opts.sigma2, opts.periods);
      break;
  }
  if (offset) spec.offset = data.columns[*offset];
  if (known) spec.known_variance = data.columns[*known];
  validate_model(spec);
  return bm;
}

MatrixXd parse_edge_list(std::istream& in, std::string_view source, std::optional<Index> nodes) {
  std::vector<std::pair<long long, long long>> edges;
  std::string line;
  std::size_t lineno = 0;
  long long max_node = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    std::istringstream ss(line);
    std::string a, c, extra;
    ss >> a >> c;
    if (c.empty() || (ss >> extra)) {
      fail(Errc::ParseError, std::string(source) + ":" + std::to_string(lineno) + ": expected 'i j'");
    }
    const long long i = parse_integer(a, source, lineno);
    const long long j = parse_integer(c, source, lineno);
    if (i < 1 || j < 1) {
      fail(Errc::ParseError, std::string(source) + ":" + std::to_string(lineno) + ": node ids are 1-based");
    }
    if (i == j) {
      fail(Errc::ParseError, std::string(source) + ":" + std::to_string(lineno) + ": self-loop");
    }
    edges.emplace_back(i, j);
    max_node = std::max({max_node, i, j});
  }
  const Index dim = nodes ? *nodes : static_cast<Index>(max_node);
  if (max_node > dim) fail(Errc::ParseError, std::string(source) + ": node id exceeds node count");
  MatrixXd w = MatrixXd::Zero(dim, dim);
  for (const auto& [i, j] : edges) w(i - 1, j - 1) = w(j - 1, i - 1) = 1.0;
  validate_adjacency(w);
  return w;
}

MatrixXd read_edge_list(const std::string& path, std::optional<Index> nodes) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  return parse_edge_list(in, path, nodes);
}

void write_edge_list(const std::string& path, const MatrixXd& adjacency) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  for (Index i = 0; i < adjacency.rows(); ++i) {
    for (Index j = i + 1; j < adjacency.cols(); ++j) {
      if (adjacency(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << '\n';
    }
  }
}

}  // namespace axecv
