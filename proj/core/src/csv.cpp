#include "multivar/csv.hpp"

#include "multivar/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace multivar {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected " << table.header.size() << " fields, found "
          << cells.size();
      throw ValidationError(msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty() || cells[c] == "NA" || cells[c] == "nan") {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": missing value in column '" << table.header[c] << "'";
        throw ValidationError(msg.str());
      }
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ValidationError(path.string() + ": empty file");
  return table;
}

double parse_double(const std::string& cell, const std::string& context) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
    throw ValidationError(context + ": '" + cell + "' is not a finite number");
  }
  return v;
}

Matrix numeric_matrix(const CsvTable& table, const std::filesystem::path& origin) {
  Matrix m(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      std::ostringstream ctx;
      ctx << origin.string() << ":" << (r + 2) << " column '" << table.header[c] << "'";
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_double(table.rows[r][c], ctx.str());
    }
  }
  return m;
}

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_double(m(r, c));
    os << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix_csv(out, m, header);
}

}  // namespace multivar
