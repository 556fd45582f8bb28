#pragma once

#include <string>
#include <variant>
#include <vector>

namespace nlh {

using CsvCell = std::variant<double, long, std::string>;

struct CsvTable {
  std::vector<std::string> comments;  // leading "# " lines, without the marker
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

/// Doubles are written as %.17e so values round-trip exactly.
std::string format_cell(const CsvCell& cell);
void write_csv(const std::string& path, const CsvTable& table);
std::string to_csv_string(const CsvTable& table);

struct CsvText {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

CsvText read_csv(const std::string& path);
double parse_double(const std::string& s);

}  // namespace nlh
