#pragma once

#include "multivar/solver.hpp"
#include "multivar/var_core.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace multivar {

enum class CvScheme { blocked, rolling_window };

CvScheme parse_cv_scheme(const std::string& name);
std::string to_string(CvScheme s);

/// Half-open range [begin, end) of 0-based time indices.
struct Block {
  int begin = 0;
  int end = 0;
  int size() const noexcept { return end - begin; }
  bool contains(int t) const noexcept { return t >= begin && t < end; }
};

struct FoldPlan {
  CvScheme scheme = CvScheme::blocked;
  std::vector<std::vector<Block>> blocks;  // per subject, per fold
  int window = 0;                          // rolling-window length

  int num_folds() const noexcept { return blocks.empty() ? 0 : static_cast<int>(blocks.front().size()); }
};

/// F contiguous, temporally ordered blocks per subject. The T mod F extra
/// points go one each to the last blocks. Requires every T >= F (p + 2).
FoldPlan make_blocked_folds(std::span<const int> t_lens, int folds, int p = 1);
std::vector<Block> blocked_folds(int t_len, int folds, int p = 1);

/// Training targets for a held-out block: neither the target nor any of its
/// p lags falls inside the block widened by `gap` on both sides.
RegressionForm training_form(const SubjectSeries& series, int p, const Block& test, int gap = 0);

struct ForecastError {
  double sse = 0.0;
  int points = 0;  // scored time points
  int dim = 0;

  double msfe() const noexcept { return points > 0 ? sse / (static_cast<double>(points) * dim) : 0.0; }
};

/// One-step-ahead squared errors over `block` using observed lags. Points
/// without p observed predecessors are skipped.
ForecastError forecast_errors(const Matrix& phi_stacked, const Matrix& data, int p, const Block& block);
double forecast_msfe(const Matrix& phi_stacked, const Matrix& data, int p, const Block& block);

struct CvCell {
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;  // shared multiplier of each subject's lambda2 max
  double msfe = 0.0;
  std::vector<double> subject_msfe;
  bool valid = true;
  std::string reason;
};

struct CvTable {
  std::vector<CvCell> cells;  // LambdaGrid::cell_index order
  std::size_t selected = 0;

  const CvCell& best() const { return cells.at(selected); }
};

/// Minimum-MSFE valid cell; ties go to the larger lambda1, then larger lambda2.
std::size_t select_cell(const std::vector<CvCell>& cells);

void write_cv_table_csv(std::ostream& os, const CvTable& table);

struct CvOptions {
  int p = 1;
  SolverConfig solver;
  ActiveBlocks blocks = ActiveBlocks::common_and_unique;
  int gap = 0;
  int workers = 1;  // blocked CV folds solved concurrently
};

struct CvResult {
  CvTable table;
  LambdaGrid grid;
  PenaltySpec selected_penalty;
  SolveResult refit;  // cold-start fit on the full data at the selected cell
};

CvResult bcv_select(const MultiSubjectSeries& data, const LambdaGrid& grid,
                    const std::optional<AdaptiveWeights>& weights, const FoldPlan& plan, const CvOptions& opts = {});

/// Rolling-window CV: each origin fits on the trailing `window` points of every
/// subject that still has a next observation and scores that one-step forecast.
CvResult rwcv_select(const MultiSubjectSeries& data, const LambdaGrid& grid,
                     const std::optional<AdaptiveWeights>& weights, int window, const CvOptions& opts = {});

int default_rwcv_window(const MultiSubjectSeries& data);

/// Blocked CV for one subject over `num_candidates` models produced by `fit`
/// on each training form. Returns the mean MSFE per candidate.
using CandidateFitter = std::function<std::vector<Matrix>(const RegressionForm& train)>;
std::vector<double> single_subject_bcv(const SubjectSeries& series, int p, std::span<const Block> folds,
                                       const CandidateFitter& fit, std::size_t num_candidates, int gap = 0);

/// Index of the smallest value; ties go to the earliest index.
std::size_t argmin_first(std::span<const double> values);

}  // namespace multivar
