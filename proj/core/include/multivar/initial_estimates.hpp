#pragma once

#include "multivar/solver.hpp"
#include "multivar/var_core.hpp"
#include "multivar/weights.hpp"

#include <optional>
#include <vector>

namespace multivar {

struct InitialOptions {
  int folds = 10;
  int ridge_grid_size = 20;
  int lasso_grid_size = 20;
  double lasso_ratio = 1e-3;
  SolverConfig solver;
};

/// Per-subject OLS (the Gaussian maximum-likelihood estimate).
InitialEstimates initial_ml(const MultiSubjectSeries& data, int p);

/// (Y Z^T)(Z Z^T + gamma I)^{-1}.
Matrix fit_ridge(const RegressionForm& reg, double gamma);

/// Default ridge levels: 20 log-spaced values over [1e-4, 1e2] * trace(Z Z^T) / dp, descending.
std::vector<double> default_ridge_grid(const RegressionForm& reg, int n = 20);

/// Per-subject ridge with the penalty picked by blocked CV. An explicit grid
/// (absolute levels) replaces the scale-aware default for every subject.
InitialEstimates initial_ridge(const MultiSubjectSeries& data, int p,
                               const std::optional<std::vector<double>>& ridge_grid = std::nullopt,
                               const InitialOptions& opts = {});

/// Single-subject weighted lasso path (unique block only) at the given
/// absolute penalty levels, warm-started in the given order.
std::vector<Matrix> lasso_path(const RegressionForm& reg, int p, const std::vector<double>& lambdas,
                               const std::optional<Matrix>& weights, const SolverConfig& cfg);

/// Blocked-CV-tuned single-subject (weighted) lasso over a log grid from the
/// subject's lambda max down to ratio * max. Returns the refit and the level.
struct SingleSubjectLasso {
  Matrix phi;
  double lambda = 0.0;
};
SingleSubjectLasso cv_lasso_single(const SubjectSeries& series, int p, const std::optional<Matrix>& weights,
                                   int grid_size, double ratio, int folds, const SolverConfig& cfg);

/// Per-subject lasso with the penalty picked by blocked CV.
InitialEstimates initial_lasso(const MultiSubjectSeries& data, int p, const InitialOptions& opts = {});

struct OlsInference {
  Matrix phi;
  Matrix t_stat;
  Matrix p_value;
  int df = 0;
};

/// OLS with classical row-wise standard errors and two-sided t-test p-values.
OlsInference ols_inference(const RegressionForm& reg, int p);

/// OLS per subject with non-significant entries (p-value >= alpha_level) set
/// to zero. alpha_level >= 1 disables thresholding.
std::vector<VarModel> ml_thresholded(const MultiSubjectSeries& data, int p, double alpha_level = 0.05);

}  // namespace multivar
