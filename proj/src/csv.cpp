#include "nlh/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "nlh/errors.hpp"

namespace nlh {

std::string format_cell(const CsvCell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", *d);
    return buf;
  }
  if (const auto* i = std::get_if<long>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

std::string to_csv_string(const CsvTable& table) {
  std::string out;
  for (const auto& c : table.comments) out += "# " + c + "\n";
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    out += (j ? "," : "") + table.header[j];
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_cell(row[j]);
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << to_csv_string(table);
  if (!f) throw IoError("write failed for " + path);
}

int CsvText::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<int>(j);
  }
  throw IoError("missing CSV column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvText read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  CsvText t;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.header.size()) throw IoError("ragged CSV row in " + path);
      t.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw IoError("CSV without header: " + path);
  return t;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw IoError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw IoError("not a number: '" + s + "'");
  return v;
}

}  // namespace nlh
