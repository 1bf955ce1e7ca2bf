#pragma once

#include "multivar/var_core.hpp"
#include "multivar/weights.hpp"

#include <optional>
#include <vector>

namespace multivar {

/// Phi_k = common + unique[k]. Totals are always recomputed from the blocks.
struct EffectsDecomposition {
  Matrix common;
  std::vector<Matrix> unique;

  static EffectsDecomposition zeros(int d, int cols, int k);

  int num_subjects() const noexcept { return static_cast<int>(unique.size()); }
  Matrix total(std::size_t k) const { return common + unique.at(k); }
  std::vector<Matrix> totals() const;
};

/// Which parameter blocks are free. `unique_only` is K independent
/// (weighted) lasso problems; `common_only` is the pooled fit.
enum class ActiveBlocks { common_and_unique, unique_only, common_only };

struct PenaltySpec {
  double lambda1 = 0.0;
  std::vector<double> lambda2;              // one per subject
  std::optional<AdaptiveWeights> weights;   // absent: all weights 1
  ActiveBlocks blocks = ActiveBlocks::common_and_unique;

  void validate(int num_subjects, Eigen::Index rows, Eigen::Index cols) const;
};

enum class StepRule { fixed, backtracking };

struct SolverConfig {
  int max_iter = 5000;
  double tol = 1e-6;  // relative objective change
  StepRule step_rule = StepRule::fixed;
  double backtrack_factor = 2.0;  // L multiplier on a failed sufficient-decrease test

  void validate() const;
};

struct SolverDiagnostics {
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double step = 0.0;
  int restarts = 0;
  /// Some total entry is below 1e-12 in magnitude although a block is nonzero there.
  bool cancellation = false;
};

struct SolveResult {
  EffectsDecomposition fit;
  SolverDiagnostics diagnostics;
};

/// Sufficient statistics of the multi-subject least-squares term
///   (1/N) sum_k ||Y_k - (G0 + Gk) Z_k||^2,  N = sum_k d (T_k - p).
class MultiVarProblem {
 public:
  MultiVarProblem(std::vector<RegressionForm> forms, int p);
  static MultiVarProblem from_series(const MultiSubjectSeries& data, int p);

  int num_subjects() const noexcept { return static_cast<int>(forms_.size()); }
  int dim() const noexcept { return dim_; }
  int lag_order() const noexcept { return p_; }
  int num_cols() const noexcept { return dim_ * p_; }
  double normalizer() const noexcept { return normalizer_; }

  const RegressionForm& form(std::size_t k) const { return forms_.at(k); }
  const Matrix& gram(std::size_t k) const { return gram_.at(k); }    // Z Z^T
  const Matrix& cross(std::size_t k) const { return cross_.at(k); }  // Y Z^T

  /// Smooth term evaluated from residuals.
  double loss(const EffectsDecomposition& dec) const;
  /// Smooth term and its gradient from the Gram statistics.
  double loss_and_gradient(const EffectsDecomposition& dec, EffectsDecomposition& grad,
                           ActiveBlocks blocks = ActiveBlocks::common_and_unique) const;
  double loss_from_gram(const EffectsDecomposition& dec) const;

  /// Upper bound on the gradient's Lipschitz constant for the active blocks.
  double lipschitz_bound(ActiveBlocks blocks) const;

 private:
  std::vector<RegressionForm> forms_;
  std::vector<Matrix> gram_;
  std::vector<Matrix> cross_;
  std::vector<double> yy_;
  std::vector<double> gram_norm_;
  int dim_ = 0;
  int p_ = 1;
  double normalizer_ = 1.0;
};

double penalty_value(const EffectsDecomposition& dec, const PenaltySpec& pen);

/// Least-squares term plus weighted l1 penalties on the common and unique blocks.
double objective(const MultiVarProblem& problem, const EffectsDecomposition& dec, const PenaltySpec& pen);

/// sign(v) * max(|v| - threshold * w, 0), entrywise.
Matrix prox_weighted_l1(const Matrix& v, double threshold, const Matrix& w);
Matrix prox_weighted_l1(const Matrix& v, double threshold);

/// Monotone FISTA over (common, unique_1..unique_K).
/// Throws DivergenceError on a non-finite objective.
SolveResult fista_solve(const MultiVarProblem& problem, const PenaltySpec& pen, const SolverConfig& cfg = {},
                        const std::optional<EffectsDecomposition>& warm_start = std::nullopt);

struct LambdaMax {
  double lambda1 = 0.0;
  std::vector<double> lambda2;
};

/// Penalty levels at which the all-zero decomposition is stationary.
LambdaMax lambda_max(const MultiVarProblem& problem, const std::optional<AdaptiveWeights>& weights = std::nullopt);

/// Smallest lambda1 for which common = 0 is optimal given the lambda2 in `pen`
/// (solves the unique-only problem, then reads the common-block gradient).
double lambda1_max_given(const MultiVarProblem& problem, const PenaltySpec& pen, const SolverConfig& cfg = {});

/// Per-subject smallest lambda2 for which unique = 0 is optimal given lambda1.
std::vector<double> lambda2_max_given(const MultiVarProblem& problem, const PenaltySpec& pen,
                                      const SolverConfig& cfg = {});

/// Descending log-spaced grids. lambda2 is a shared multiplier grid applied to
/// each subject's lambda2 max, so cell (i, j) uses lambda2_k = lambda2_values[j] * lambda2_max[k].
struct LambdaGrid {
  std::vector<double> lambda1_values;
  std::vector<double> lambda2_values;  // fractions in (0, 1], descending
  std::vector<double> lambda2_max;

  std::size_t num_cells() const noexcept { return lambda1_values.size() * lambda2_values.size(); }
  std::size_t cell_index(std::size_t i1, std::size_t i2) const noexcept { return i1 * lambda2_values.size() + i2; }
  std::vector<double> lambda2_for(std::size_t i2) const;
  PenaltySpec penalty(std::size_t i1, std::size_t i2, const std::optional<AdaptiveWeights>& weights,
                      ActiveBlocks blocks = ActiveBlocks::common_and_unique) const;
};

std::vector<double> log_spaced_descending(double hi, double ratio, int n);

LambdaGrid build_grid(const MultiVarProblem& problem, const std::optional<AdaptiveWeights>& weights, int n1 = 10,
                      int n2 = 10, double ratio = 0.01);
/// Separate floor ratios for the lambda1 and lambda2 axes.
LambdaGrid build_grid(const MultiVarProblem& problem, const std::optional<AdaptiveWeights>& weights, int n1, int n2,
                      double ratio1, double ratio2);

struct PathResult {
  LambdaGrid grid;
  std::vector<SolveResult> cells;  // indexed by LambdaGrid::cell_index
};

/// Solves every grid cell, warm-starting along descending lambda2 within a row
/// and from the previous row's first cell when lambda1 steps down.
PathResult fit_path(const MultiVarProblem& problem, const LambdaGrid& grid,
                    const std::optional<AdaptiveWeights>& weights, const SolverConfig& cfg = {},
                    ActiveBlocks blocks = ActiveBlocks::common_and_unique);

}  // namespace multivar
