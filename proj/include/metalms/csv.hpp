#pragma once

#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace metalms {

// Shortest decimal rendering that round-trips (17 significant digits at most).
std::string format_number(double v);
double parse_number(const std::string& text);

using CsvCell = std::variant<double, long, std::string>;

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> header);
  void row(const std::vector<CsvCell>& cells);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t width_;
};

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name, or -1.
  int column(const std::string& name) const;
};

CsvDocument read_csv(const std::string& path);
CsvDocument parse_csv(std::istream& in);

// A numeric table: one row per step, all columns numeric.
struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void emit_csv(const Series& series, const std::string& path);
Series read_series(const std::string& path);

}  // namespace metalms
