#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace multivar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// VAR(p) model X_t = sum_l Phi_l X_{t-l} + E_t with E_t ~ N(0, noise_cov).
///
/// Coefficients are stored per lag; `stacked()` returns the d x (dp)
/// regression-form matrix [Phi_1 ... Phi_p] used by every estimator.
class VarModel {
 public:
  /// Validates squareness, matching dimensions and a symmetric PSD noise
  /// covariance (tolerance 1e-10); throws DimensionError otherwise.
  VarModel(std::vector<Matrix> phi, Matrix noise_cov);

  /// Builds a model from a stacked d x (dp) coefficient matrix.
  static VarModel from_stacked(const Matrix& stacked, int p, Matrix noise_cov);
  static VarModel from_stacked(const Matrix& stacked, int p);

  int lag_order() const noexcept { return static_cast<int>(phi_.size()); }
  int dim() const noexcept { return static_cast<int>(phi_.front().rows()); }
  const std::vector<Matrix>& phi() const noexcept { return phi_; }
  const Matrix& phi(int lag) const { return phi_.at(static_cast<std::size_t>(lag)); }
  const Matrix& noise_cov() const noexcept { return noise_cov_; }
  Matrix stacked() const;

 private:
  std::vector<Matrix> phi_;
  Matrix noise_cov_;
};

/// One subject's observations: rows are variables, columns are time points.
struct SubjectSeries {
  Matrix data;
  std::string subject_id;

  int dim() const noexcept { return static_cast<int>(data.rows()); }
  int length() const noexcept { return static_cast<int>(data.cols()); }
};

/// K subjects sharing the same variable set; lengths may differ.
class MultiSubjectSeries {
 public:
  MultiSubjectSeries() = default;
  /// Throws DimensionError on an empty list, mixed d, or non-finite entries.
  explicit MultiSubjectSeries(std::vector<SubjectSeries> subjects);

  int num_subjects() const noexcept { return static_cast<int>(subjects_.size()); }
  int dim() const noexcept { return subjects_.empty() ? 0 : subjects_.front().dim(); }
  int min_length() const;
  const std::vector<SubjectSeries>& subjects() const noexcept { return subjects_; }
  const SubjectSeries& operator[](std::size_t k) const { return subjects_.at(k); }

 private:
  std::vector<SubjectSeries> subjects_;
};

/// Y = Phi Z + U: y is d x n, z is (dp) x n with lag 1 stacked on top.
struct RegressionForm {
  Matrix y;
  Matrix z;

  int num_obs() const noexcept { return static_cast<int>(y.cols()); }
};

/// Full regression form over all targets t = p .. T-1 (0-based).
RegressionForm build_regression(const SubjectSeries& series, int p);

/// Regression form restricted to targets t for which `keep(t)` holds.
/// Every kept target needs p observed predecessors, so t >= p is implied.
RegressionForm build_regression(const SubjectSeries& series, int p,
                                const std::function<bool(int)>& keep);

/// Lag vector [x_{t-1}; ...; x_{t-p}] for target index t >= p.
Vector lag_vector(const Matrix& data, int t, int p);

Matrix companion_matrix(const VarModel& model);
double spectral_radius(const Matrix& square);
double spectral_radius(const VarModel& model);

/// True iff the companion spectral radius is strictly below `margin`.
bool is_stable(const VarModel& model, double margin = 1.0);

inline constexpr int kDefaultBurnIn = 200;

/// Gaussian simulation of the model. Throws UnstableModelError when the
/// model is not stable at margin 1. `initial` (d x p, most recent lag first)
/// seeds the recursion; zeros by default.
SubjectSeries simulate_var(const VarModel& model, int t_len, int burn_in, std::uint64_t seed,
                           const std::optional<Matrix>& initial = std::nullopt);

struct OlsFit {
  VarModel model;
  int rank = 0;
  bool minimum_norm = false;  // design rank < dp; returned minimum-norm solution
};

/// Row-wise least squares via a complete orthogonal decomposition; the
/// residual covariance (divided by the number of targets) is stored as noise_cov.
OlsFit fit_ols(const SubjectSeries& series, int p);
OlsFit fit_ols(const RegressionForm& reg, int p);

/// Subtracts the per-variable mean; returns the means.
Vector center_in_place(SubjectSeries& series);

}  // namespace multivar
