#pragma once

#include "multivar/simulator.hpp"
#include "multivar/var_core.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace multivar::cli {

/// On-disk dataset: one CSV per subject (header = variable names, one row per
/// time point) plus manifest.json and, for simulated data, truth.json.
struct Bundle {
  MultiSubjectSeries series;
  std::vector<std::string> variables;
  std::vector<std::string> files;  // relative to the bundle directory
  nlohmann::json manifest;
  std::optional<nlohmann::json> truth;
};

std::vector<std::string> default_variable_names(int d);

/// Writes subject CSVs and the manifest; `meta` is merged into the manifest.
void write_bundle(const std::filesystem::path& dir, const MultiSubjectSeries& series,
                  const std::vector<std::string>& variables, const nlohmann::json& meta = nlohmann::json::object());

/// Truth sidecar: per-subject stacked coefficients and supports, the common
/// support and the lag order.
nlohmann::json truth_json(const GeneratedDataset& ds);
void write_truth(const std::filesystem::path& dir, const nlohmann::json& truth);

/// Reads and cross-checks a bundle. Throws ValidationError naming the file
/// (and line, for CSV problems) when the manifest and files disagree.
Bundle read_bundle(const std::filesystem::path& dir);

/// Per-subject true stacked matrices from a truth sidecar.
std::vector<Matrix> truth_matrices(const nlohmann::json& truth);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& context);

}  // namespace multivar::cli
