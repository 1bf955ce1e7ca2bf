#pragma once

#include "multivar/var_core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace multivar {

/// Shortest decimal form that round-trips to the same double ("%.17g" fallback).
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, first line is the header. Throws ValidationError with
/// file and line context on ragged rows or empty cells.
CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(const std::string& line);

/// Numeric table -> (rows x header.size()) matrix; throws on missing or
/// non-numeric values with file and line context.
Matrix numeric_matrix(const CsvTable& table, const std::filesystem::path& origin);

double parse_double(const std::string& cell, const std::string& context);

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& header);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header);

}  // namespace multivar
