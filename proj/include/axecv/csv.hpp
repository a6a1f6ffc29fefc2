#pragma once

// Minimal CSV: comma separated, optional double quotes around a field, lines
// starting with '#' and blank lines skipped. Numbers use '.' decimals.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace axecv {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  std::size_t column(std::string_view name) const;  // throws ParseError
  bool has_column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in, std::string_view source = "<stream>");
CsvTable read_csv_file(const std::string& path);

/// Throws ParseError naming source, line and field on failure.
double parse_double(std::string_view field, std::string_view source, std::size_t line);
long long parse_integer(std::string_view field, std::string_view source, std::size_t line);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

/// "# axecv <version> seed=<seed>"
void write_preamble(std::ostream& os, std::uint64_t seed);

std::string version_string();

}  // namespace axecv
