#include "axecv/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "axecv/error.hpp"

#ifndef AXECV_VERSION
#define AXECV_VERSION "0.0.0"
#endif

namespace axecv {

namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

std::vector<std::string> split_line(const std::string& line, std::string_view source,
                                    std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty() || was_quoted) fail(Errc::ParseError, where(source, lineno) + ": stray quote");
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
      was_quoted = false;
    } else {
      if (was_quoted && c != ' ' && c != '\t') {
        fail(Errc::ParseError, where(source, lineno) + ": text after closing quote");
      }
      if (!was_quoted) cur += c;
    }
  }
  if (quoted) fail(Errc::ParseError, where(source, lineno) + ": unterminated quote");
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  fail(Errc::ParseError, "no column named '" + std::string(name) + "'");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable read_csv(std::istream& in, std::string_view source) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    auto fields = split_line(line, source, lineno);
    if (!have_header) {
      for (const auto& h : fields) {
        if (h.empty()) fail(Errc::ParseError, where(source, lineno) + ": empty column name");
      }
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      fail(Errc::ParseError, where(source, lineno) + ": expected " + std::to_string(t.header.size()) +
                                 " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  if (!have_header) fail(Errc::ParseError, std::string(source) + ": missing header row");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path);
  return read_csv(in, path);
}

double parse_double(std::string_view field, std::string_view source, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && field.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    fail(Errc::ParseError, where(source, line) + ": '" + std::string(field) + "' is not a number");
  }
  return v;
}

long long parse_integer(std::string_view field, std::string_view source, std::size_t line) {
  long long v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && field.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    fail(Errc::ParseError, where(source, line) + ": '" + std::string(field) + "' is not an integer");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(Errc::IoError, "cannot format number");
  return std::string(buf, ptr);
}

std::string version_string() { return AXECV_VERSION; }

void write_preamble(std::ostream& os, std::uint64_t seed) {
  os << "# axecv " << version_string() << " seed=" << seed << '\n';
}

}  // namespace axecv
