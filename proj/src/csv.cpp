#include "metalms/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "metalms/errors.hpp"

namespace metalms {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && *begin == ' ') ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\r')) --end;
  if (begin < end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) throw InvalidInput("not a number: '" + text + "'");
  return v;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> header)
    : out_(path), path_(path), width_(header.size()) {
  if (!out_) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != width_) throw InvalidInput("csv row width differs from header in '" + path_ + "'");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [this](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, double>)
            out_ << format_number(c);
          else
            out_ << c;
        },
        cells[i]);
  }
  out_ << '\n';
  if (!out_) throw IoError("write failed for '" + path_ + "'");
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError("closing '" + path_ + "' failed");
}

int CsvDocument::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace

CsvDocument parse_csv(std::istream& in) {
  CsvDocument doc;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("csv input has no header");
  doc.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != doc.header.size()) throw InvalidInput("csv row width differs from header");
    doc.rows.push_back(std::move(cells));
  }
  return doc;
}

CsvDocument read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return parse_csv(in);
}

void emit_csv(const Series& series, const std::string& path) {
  if (series.columns.empty() || series.rows.empty()) throw InvalidInput("emit_csv: series is empty");
  CsvWriter w(path, series.columns);
  std::vector<CsvCell> cells(series.columns.size());
  for (const auto& r : series.rows) {
    if (r.size() != series.columns.size()) throw InvalidInput("emit_csv: ragged series");
    for (std::size_t i = 0; i < r.size(); ++i) cells[i] = r[i];
    w.row(cells);
  }
  w.close();
}

Series read_series(const std::string& path) {
  const CsvDocument doc = read_csv(path);
  Series s;
  s.columns = doc.header;
  for (const auto& r : doc.rows) {
    std::vector<double> v;
    v.reserve(r.size());
    for (const auto& c : r) v.push_back(parse_number(c));
    s.rows.push_back(std::move(v));
  }
  return s;
}

}  // namespace metalms
