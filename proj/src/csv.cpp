#include "twistlab/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "twistlab/common.hpp"

namespace twistlab::csv {

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_header(std::ostream& out, std::initializer_list<const char*> names) {
  bool first = true;
  for (const char* n : names) {
    if (!first) out << ',';
    out << n;
    first = false;
  }
  out << '\n';
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format(values[i]);
  }
  out << '\n';
}

void write_row(std::ostream& out, std::initializer_list<double> values) { write_row(out, std::vector<double>(values)); }

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return cells;
}

bool parse_numbers(const std::vector<std::string>& cells, std::vector<double>& out) {
  out.clear();
  for (const auto& c : cells) {
    if (c.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(c.c_str(), &end);
    if (end != c.c_str() + c.size()) return false;
    out.push_back(v);
  }
  return true;
}

}  // namespace

Table read(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (parse_numbers(cells, values)) {
      table.rows.push_back(values);
    } else if (table.rows.empty() && table.header.empty()) {
      table.header = cells;
    } else {
      throw ArgumentError("csv: non-numeric row at line " + std::to_string(line_no));
    }
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("csv: cannot open " + path);
  return read(in);
}

}  // namespace twistlab::csv
