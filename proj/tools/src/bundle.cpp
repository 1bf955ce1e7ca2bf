#include "multivar_cli/bundle.hpp"

#include "multivar/csv.hpp"
#include "multivar/error.hpp"

#include <fstream>
#include <set>

namespace multivar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
}

template <typename T>
T field(const json& j, const char* key, const fs::path& origin) {
  if (!j.contains(key)) throw ValidationError(origin.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(origin.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<std::string> default_variable_names(int d) {
  std::vector<std::string> out;
  for (int i = 1; i <= d; ++i) out.push_back("V" + std::to_string(i));
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ValidationError(context + ": expected a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError(context + ": row " + std::to_string(i + 1) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ValidationError(context + ": non-numeric entry");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

void write_bundle(const fs::path& dir, const MultiSubjectSeries& series, const std::vector<std::string>& variables,
                  const json& meta) {
  if (static_cast<int>(variables.size()) != series.dim()) {
    throw DimensionError("variable names do not match the series dimension");
  }
  fs::create_directories(dir);
  json subjects = json::array();
  for (const auto& s : series.subjects()) {
    const std::string file = s.subject_id + ".csv";
    write_matrix_csv(dir / file, s.data.transpose(), variables);
    subjects.push_back({{"id", s.subject_id}, {"file", file}, {"T", s.length()}});
  }
  json manifest = {{"format", "multivar-bundle"},
                   {"version", 1},
                   {"d", series.dim()},
                   {"K", series.num_subjects()},
                   {"variables", variables},
                   {"subjects", subjects}};
  for (const auto& [key, value] : meta.items()) manifest[key] = value;
  write_json(dir / "manifest.json", manifest);
}

json truth_json(const GeneratedDataset& ds) {
  json subjects = json::array();
  for (std::size_t k = 0; k < ds.true_models.size(); ++k) {
    const Matrix phi = ds.true_models[k].stacked();
    subjects.push_back({{"id", ds.series[k].subject_id},
                        {"phi", matrix_to_json(phi)},
                        {"support", matrix_to_json(ds.true_supports[k].cast<double>())}});
  }
  return {{"p", ds.true_models.front().lag_order()},
          {"common_support", matrix_to_json(ds.true_common_support.cast<double>())},
          {"subjects", subjects}};
}

void write_truth(const fs::path& dir, const json& truth) { write_json(dir / "truth.json", truth); }

std::vector<Matrix> truth_matrices(const json& truth) {
  std::vector<Matrix> out;
  if (!truth.contains("subjects") || !truth["subjects"].is_array()) {
    throw ValidationError("truth.json: missing 'subjects' array");
  }
  for (const auto& s : truth["subjects"]) {
    if (!s.contains("phi")) throw ValidationError("truth.json: subject without 'phi'");
    out.push_back(matrix_from_json(s["phi"], "truth.json"));
  }
  return out;
}

Bundle read_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  Bundle b;
  b.manifest = read_json(manifest_path);
  const int d = field<int>(b.manifest, "d", manifest_path);
  const int k = field<int>(b.manifest, "K", manifest_path);
  b.variables = field<std::vector<std::string>>(b.manifest, "variables", manifest_path);
  if (static_cast<int>(b.variables.size()) != d) {
    throw ValidationError(manifest_path.string() + ": 'variables' lists " + std::to_string(b.variables.size()) +
                          " names but d = " + std::to_string(d));
  }
  const json subjects = field<json>(b.manifest, "subjects", manifest_path);
  if (!subjects.is_array() || static_cast<int>(subjects.size()) != k || k < 1) {
    throw ValidationError(manifest_path.string() + ": 'subjects' must list K = " + std::to_string(k) + " entries");
  }
  std::set<std::string> ids;
  std::vector<SubjectSeries> series;
  for (const auto& s : subjects) {
    const auto id = field<std::string>(s, "id", manifest_path);
    const auto file = field<std::string>(s, "file", manifest_path);
    const int t_len = field<int>(s, "T", manifest_path);
    if (!ids.insert(id).second) throw ValidationError(manifest_path.string() + ": duplicate subject id '" + id + "'");
    const fs::path csv_path = dir / file;
    const auto table = read_csv(csv_path);
    if (table.header != b.variables) {
      throw ValidationError(csv_path.string() + ":1: header does not match the manifest variables");
    }
    Matrix data = numeric_matrix(table, csv_path).transpose();
    if (data.cols() != t_len) {
      throw ValidationError(csv_path.string() + ": has " + std::to_string(data.cols()) +
                            " time points but the manifest says T = " + std::to_string(t_len));
    }
    series.push_back(SubjectSeries{std::move(data), id});
    b.files.push_back(file);
  }
  b.series = MultiSubjectSeries(std::move(series));
  if (fs::exists(dir / "truth.json")) b.truth = read_json(dir / "truth.json");
  return b;
}

}  // namespace multivar::cli
