#pragma once

#include "multivar/cv.hpp"
#include "multivar/initial_estimates.hpp"
#include "multivar/solver.hpp"
#include "multivar/var_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace multivar {

/// Estimator roster: joint multi-subject fits and per-subject (K = 1) baselines.
enum class Method {
  multivar_standard,
  multivar_adaptive_ml,
  multivar_adaptive_ridge,
  multivar_adaptive_lasso,
  k1_ml_thresh,
  k1_adaptive_ml,
  k1_adaptive_ridge,
  k1_adaptive_lasso,
};

Method parse_method(const std::string& name);
std::string to_string(Method m);
std::vector<Method> all_methods();
bool is_multivar(Method m);

/// Penalty levels to use instead of cross-validation: lambda1 absolute,
/// lambda2 as the multiplier of each subject's lambda2 max. K = 1 adaptive
/// methods take absolute per-subject levels from `subject_lambda` when given.
struct FixedPenalty {
  double lambda1 = 0.0;
  double lambda2_fraction = 1.0;
  std::vector<double> subject_lambda;
};

struct MethodConfig {
  Method method = Method::multivar_adaptive_lasso;
  int p = 1;
  CvScheme cv = CvScheme::blocked;
  int folds = 10;
  int grid_n1 = 10;
  int grid_n2 = 10;
  double grid_ratio = 0.01;   // lambda1 floor relative to its max
  double grid_ratio2 = 0.1;  // lambda2 floor relative to each subject's max
  int rwcv_window = 0;  // 0: half the shortest series
  int workers = 1;      // concurrent CV folds
  double alpha = 1.0;
  double ml_alpha_level = 0.05;
  int k1_grid_size = 20;
  double k1_grid_ratio = 1e-3;
  InitialOptions initial;
  SolverConfig solver;
  std::optional<FixedPenalty> fixed;
};

struct MethodResult {
  Method method = Method::multivar_adaptive_lasso;
  std::vector<Matrix> totals;                          // per subject, d x dp
  std::optional<EffectsDecomposition> decomposition;   // multi-subject methods only
  std::optional<CvTable> cv_table;
  std::optional<LambdaGrid> grid;
  double lambda1 = 0.0;
  double lambda2_fraction = 0.0;
  std::vector<double> lambda2;         // per subject (absolute)
  std::vector<double> subject_lambda;  // K = 1 adaptive lasso levels
  SolverDiagnostics diagnostics;
  double zero_tol = 1e-12;
};

/// Runs the configured estimator end to end (initial estimates, weights,
/// penalty selection, final fit). Data are used as given; center beforehand.
MethodResult fit_method(const MultiSubjectSeries& data, const MethodConfig& cfg);

/// Initial estimates for the adaptive multi-subject methods.
InitialEstimates initial_estimates(const MultiSubjectSeries& data, InitialMethod m, int p, const InitialOptions& opts);

/// Copy of `data` with each subject's variables centered; means returned per subject.
MultiSubjectSeries centered(const MultiSubjectSeries& data, std::vector<Vector>* means = nullptr);

}  // namespace multivar
