#include "axecv/draws_io.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include "axecv/csv.hpp"
#include "axecv/error.hpp"

namespace axecv {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p, std::uint64_t seed) {
  std::ofstream out(p);
  if (!out) fail(Errc::IoError, "cannot write " + p.string());
  write_preamble(out, seed);
  return out;
}

std::map<std::string, std::string> read_manifest(const fs::path& p) {
  std::ifstream in(p);
  if (!in) fail(Errc::IoError, "cannot open " + p.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(Errc::ParseError, p.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) fail(Errc::ManifestMismatch, "manifest lacks '" + key + "'");
  return it->second;
}

// Rows of a draw-indexed CSV as numbers, checking the leading draw column.
MatrixXd read_indexed(const fs::path& p, Index rows, Index cols) {
  const std::string src = p.string();
  const CsvTable t = read_csv_file(src);
  if (static_cast<Index>(t.rows.size()) != rows) {
    fail(Errc::ManifestMismatch, src + " has " + std::to_string(t.rows.size()) + " rows, manifest says " +
                                     std::to_string(rows));
  }
  if (static_cast<Index>(t.header.size()) != cols + 1) {
    fail(Errc::ManifestMismatch, src + " has " + std::to_string(t.header.size() - 1) +
                                     " value columns, expected " + std::to_string(cols));
  }
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    const std::size_t line = t.lines[static_cast<std::size_t>(r)];
    if (parse_integer(row[0], src, line) != r + 1) {
      fail(Errc::ParseError, src + ":" + std::to_string(line) + ": draw index out of sequence");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_double(row[static_cast<std::size_t>(c + 1)], src, line);
  }
  return m;
}

void write_row(std::ostream& os, Index draw, const double* v, Index n) {
  os << draw;
  for (Index i = 0; i < n; ++i) os << ',' << format_double(v[i]);
  os << '\n';
}

}  // namespace

void write_draws(const std::string& dir, const PosteriorDraws& draws) {
  draws.validate();
  const fs::path d(dir);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) fail(Errc::IoError, "cannot create " + dir + ": " + ec.message());
  const Index s = draws.size(), p = draws.p(), p2 = draws.p2();

  {
    std::ofstream m(d / "manifest.txt");
    if (!m) fail(Errc::IoError, "cannot write manifest in " + dir);
    m << "format=axecv-draws-1\nS=" << s << "\nP=" << p << "\nP2=" << p2 << "\nseed=" << draws.seed
      << "\nburn_in=" << draws.burn_in << "\nsigma_form=" << (draws.scaled() ? "scaled" : "full") << '\n';
  }
  {
    auto out = open_out(d / "beta.csv", draws.seed);
    out << "draw";
    for (Index j = 0; j < p; ++j) out << ",b" << j + 1;
    out << '\n';
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> b = draws.beta;
    for (Index r = 0; r < s; ++r) write_row(out, r + 1, b.row(r).data(), p);
  }
  {
    auto out = open_out(d / "sigma.csv", draws.seed);
    if (draws.scaled()) {
      out << "draw,scale\n";
      for (Index r = 0; r < s; ++r) write_row(out, r + 1, &draws.sigma_scale(r), 1);
      auto st = open_out(d / "structure.csv", draws.seed);
      st << "draw";
      for (Index i = 0; i < p2; ++i)
        for (Index j = 0; j < p2; ++j) st << ",r" << i + 1 << '_' << j + 1;
      st << '\n';
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = draws.sigma_structure;
      write_row(st, 1, rm.data(), p2 * p2);
    } else {
      out << "draw";
      for (Index i = 0; i < p2; ++i)
        for (Index j = 0; j < p2; ++j) out << ",s" << i + 1 << '_' << j + 1;
      out << '\n';
      for (Index r = 0; r < s; ++r) {
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
            draws.sigma_full[static_cast<std::size_t>(r)];
        write_row(out, r + 1, rm.data(), p2 * p2);
      }
    }
  }
  {
    auto out = open_out(d / "tau2.csv", draws.seed);
    out << "draw,tau2\n";
    for (Index r = 0; r < s; ++r) write_row(out, r + 1, &draws.tau2(r), 1);
  }
}

PosteriorDraws read_draws(const std::string& dir) {
  const fs::path d(dir);
  const auto kv = read_manifest(d / "manifest.txt");
  if (need(kv, "format") != "axecv-draws-1") fail(Errc::ManifestMismatch, "unknown draws format");
  auto integer = [&](const std::string& key) {
    return parse_integer(need(kv, key), (d / "manifest.txt").string(), 0);
  };
  const Index s = integer("S"), p = integer("P"), p2 = integer("P2");
  if (s < 1 || p < 1 || p2 < 0 || p2 > p) fail(Errc::ManifestMismatch, "manifest dimensions are invalid");
  const std::string form = need(kv, "sigma_form");
  if (form != "scaled" && form != "full") fail(Errc::ManifestMismatch, "sigma_form must be scaled or full");

  PosteriorDraws out;
  out.seed = static_cast<std::uint64_t>(integer("seed"));
  out.burn_in = static_cast<int>(integer("burn_in"));
  out.beta = read_indexed(d / "beta.csv", s, p);
  out.tau2 = read_indexed(d / "tau2.csv", s, 1).col(0);
  if (form == "scaled") {
    out.sigma_scale = read_indexed(d / "sigma.csv", s, 1).col(0);
    const MatrixXd flat = read_indexed(d / "structure.csv", 1, p2 * p2);
    out.sigma_structure.resize(p2, p2);
    for (Index i = 0; i < p2; ++i)
      for (Index j = 0; j < p2; ++j) out.sigma_structure(i, j) = flat(0, i * p2 + j);
  } else {
    const MatrixXd flat = read_indexed(d / "sigma.csv", s, p2 * p2);
    out.sigma_full.reserve(static_cast<std::size_t>(s));
    for (Index r = 0; r < s; ++r) {
      MatrixXd m(p2, p2);
      for (Index i = 0; i < p2; ++i)
        for (Index j = 0; j < p2; ++j) m(i, j) = flat(r, i * p2 + j);
      out.sigma_full.push_back(std::move(m));
    }
  }
  out.validate();
  return out;
}

}  // namespace axecv
