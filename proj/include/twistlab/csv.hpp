#ifndef TWISTLAB_CSV_HPP
#define TWISTLAB_CSV_HPP

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace twistlab::csv {

/// Shortest round-trip-safe text for a double ("%.17g").
std::string format(double v);

void write_header(std::ostream& out, std::initializer_list<const char*> names);
void write_row(std::ostream& out, std::initializer_list<double> values);
void write_row(std::ostream& out, const std::vector<double>& values);

/// Numeric table; a first line that does not parse as numbers is kept as
/// the header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

}  // namespace twistlab::csv

#endif  // TWISTLAB_CSV_HPP
