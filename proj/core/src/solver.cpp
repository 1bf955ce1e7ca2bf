#include "multivar/solver.hpp"

#include "multivar/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace multivar {

namespace {

constexpr double kCancellationTol = 1e-12;

bool common_active(ActiveBlocks b) { return b != ActiveBlocks::unique_only; }
bool unique_active(ActiveBlocks b) { return b != ActiveBlocks::common_only; }

double weighted_l1(const Matrix& m, const Matrix* w) {
  return w ? (m.array().abs() * w->array()).sum() : m.array().abs().sum();
}

void soft_threshold_in_place(Matrix& v, double threshold, const Matrix* w) {
  if (threshold <= 0.0) return;
  if (w) {
    v = v.binaryExpr(*w, [threshold](double x, double wij) {
      const double t = threshold * wij;
      return x > t ? x - t : (x < -t ? x + t : 0.0);
    });
  } else {
    v = v.unaryExpr([threshold](double x) {
      return x > threshold ? x - threshold : (x < -threshold ? x + threshold : 0.0);
    });
  }
}

const Matrix* common_weights(const PenaltySpec& pen) {
  return pen.weights ? &pen.weights->common_weights : nullptr;
}

const Matrix* unique_weights(const PenaltySpec& pen, std::size_t k) {
  return pen.weights ? &pen.weights->unique_weights[k] : nullptr;
}

// x <- prox(y - grad / L) on the active blocks; inactive blocks stay zero.
void prox_step(const EffectsDecomposition& y, const EffectsDecomposition& grad, double lipschitz,
               const PenaltySpec& pen, EffectsDecomposition& out) {
  const double step = 1.0 / lipschitz;
  if (common_active(pen.blocks)) {
    out.common = y.common - step * grad.common;
    soft_threshold_in_place(out.common, pen.lambda1 * step, common_weights(pen));
  } else {
    out.common.setZero();
  }
  for (std::size_t k = 0; k < y.unique.size(); ++k) {
    if (unique_active(pen.blocks)) {
      out.unique[k] = y.unique[k] - step * grad.unique[k];
      soft_threshold_in_place(out.unique[k], pen.lambda2[k] * step, unique_weights(pen, k));
    } else {
      out.unique[k].setZero();
    }
  }
}

double block_inner(const EffectsDecomposition& a, const EffectsDecomposition& b) {
  double s = (a.common.array() * b.common.array()).sum();
  for (std::size_t k = 0; k < a.unique.size(); ++k) s += (a.unique[k].array() * b.unique[k].array()).sum();
  return s;
}

// out = a - b
void block_diff(const EffectsDecomposition& a, const EffectsDecomposition& b, EffectsDecomposition& out) {
  out.common = a.common - b.common;
  for (std::size_t k = 0; k < a.unique.size(); ++k) out.unique[k] = a.unique[k] - b.unique[k];
}

bool has_cancellation(const EffectsDecomposition& dec) {
  for (const auto& u : dec.unique) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double c = dec.common(i, j);
        const double v = u(i, j);
        if ((c != 0.0 || v != 0.0) && std::abs(c + v) < kCancellationTol) return true;
      }
    }
  }
  return false;
}

// Largest |grad| / w. Nudged up by a relative 1e-12 so that a solve at
// exactly this level thresholds every entry to zero despite rounding.
double max_weighted_ratio(const Matrix& grad, const Matrix* w) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < grad.cols(); ++j) {
    for (Eigen::Index i = 0; i < grad.rows(); ++i) {
      const double denom = w ? (*w)(i, j) : 1.0;
      best = std::max(best, std::abs(grad(i, j)) / denom);
    }
  }
  return best * (1.0 + 1e-12);
}

}  // namespace

EffectsDecomposition EffectsDecomposition::zeros(int d, int cols, int k) {
  EffectsDecomposition out{Matrix::Zero(d, cols), {}};
  out.unique.assign(static_cast<std::size_t>(k), Matrix::Zero(d, cols));
  return out;
}

std::vector<Matrix> EffectsDecomposition::totals() const {
  std::vector<Matrix> out;
  out.reserve(unique.size());
  for (const auto& u : unique) out.push_back(common + u);
  return out;
}

void PenaltySpec::validate(int num_subjects, Eigen::Index rows, Eigen::Index cols) const {
  if (!std::isfinite(lambda1) || lambda1 < 0.0) throw SpecError("lambda1 must be finite and >= 0");
  if (static_cast<int>(lambda2.size()) != num_subjects) {
    throw DimensionError("lambda2 needs one value per subject");
  }
  for (double l : lambda2) {
    if (!std::isfinite(l) || l < 0.0) throw SpecError("lambda2 values must be finite and >= 0");
  }
  if (weights) {
    if (weights->common_weights.rows() != rows || weights->common_weights.cols() != cols ||
        static_cast<int>(weights->unique_weights.size()) != num_subjects) {
      throw DimensionError("adaptive weights do not match the problem dimensions");
    }
    if (!weights->common_weights.allFinite()) throw SpecError("adaptive weights must be finite");
    for (const auto& w : weights->unique_weights) {
      if (w.rows() != rows || w.cols() != cols) throw DimensionError("unique weights have the wrong shape");
      if (!w.allFinite()) throw SpecError("adaptive weights must be finite");
    }
  }
}

void SolverConfig::validate() const {
  if (max_iter < 1) throw SpecError("max_iter must be >= 1");
  if (!(tol > 0.0)) throw SpecError("tol must be > 0");
  if (step_rule == StepRule::backtracking && !(backtrack_factor > 1.0)) {
    throw SpecError("backtrack_factor must exceed 1");
  }
}

MultiVarProblem::MultiVarProblem(std::vector<RegressionForm> forms, int p) : forms_(std::move(forms)), p_(p) {
  if (forms_.empty()) throw DimensionError("at least one subject is required");
  dim_ = static_cast<int>(forms_.front().y.rows());
  double total_obs = 0.0;
  for (const auto& f : forms_) {
    if (f.y.rows() != dim_ || f.z.rows() != dim_ * p_ || f.z.cols() != f.y.cols()) {
      throw DimensionError("regression forms disagree in dimension or lag order");
    }
    gram_.push_back(f.z * f.z.transpose());
    cross_.push_back(f.y * f.z.transpose());
    yy_.push_back(f.y.squaredNorm());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram_.back(), Eigen::EigenvaluesOnly);
    gram_norm_.push_back(eig.eigenvalues().size() ? std::max(0.0, eig.eigenvalues().maxCoeff()) : 0.0);
    total_obs += static_cast<double>(f.y.size());
  }
  normalizer_ = total_obs > 0.0 ? total_obs : 1.0;
}

MultiVarProblem MultiVarProblem::from_series(const MultiSubjectSeries& data, int p) {
  std::vector<RegressionForm> forms;
  for (const auto& s : data.subjects()) forms.push_back(build_regression(s, p));
  return MultiVarProblem(std::move(forms), p);
}

double MultiVarProblem::loss(const EffectsDecomposition& dec) const {
  double s = 0.0;
  for (std::size_t k = 0; k < forms_.size(); ++k) {
    s += (forms_[k].y - dec.total(k) * forms_[k].z).squaredNorm();
  }
  return s / normalizer_;
}

double MultiVarProblem::loss_from_gram(const EffectsDecomposition& dec) const {
  double s = 0.0;
  for (std::size_t k = 0; k < forms_.size(); ++k) {
    const Matrix phi = dec.common + dec.unique[k];
    s += yy_[k] - 2.0 * (phi.array() * cross_[k].array()).sum() +
         ((phi * gram_[k]).array() * phi.array()).sum();
  }
  return s / normalizer_;
}

double MultiVarProblem::loss_and_gradient(const EffectsDecomposition& dec, EffectsDecomposition& grad,
                                          ActiveBlocks blocks) const {
  const double scale = 2.0 / normalizer_;
  double s = 0.0;
  grad.common.setZero(dim_, num_cols());
  grad.unique.resize(forms_.size());
  for (std::size_t k = 0; k < forms_.size(); ++k) {
    const Matrix phi = dec.common + dec.unique[k];
    const Matrix phi_gram = phi * gram_[k];
    s += yy_[k] - 2.0 * (phi.array() * cross_[k].array()).sum() + (phi_gram.array() * phi.array()).sum();
    grad.unique[k].noalias() = scale * (phi_gram - cross_[k]);
    if (common_active(blocks)) grad.common += grad.unique[k];
  }
  if (!unique_active(blocks)) {
    for (auto& g : grad.unique) g.setZero();
  }
  return s / normalizer_;
}

double MultiVarProblem::lipschitz_bound(ActiveBlocks blocks) const {
  const double max_norm = *std::max_element(gram_norm_.begin(), gram_norm_.end());
  switch (blocks) {
    case ActiveBlocks::unique_only:
      return 2.0 * max_norm / normalizer_;
    case ActiveBlocks::common_only: {
      Matrix pooled = Matrix::Zero(num_cols(), num_cols());
      for (const auto& g : gram_) pooled += g;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(pooled, Eigen::EigenvaluesOnly);
      return 2.0 * std::max(0.0, eig.eigenvalues().maxCoeff()) / normalizer_;
    }
    case ActiveBlocks::common_and_unique:
      break;
  }
  return 2.0 * max_norm * (num_subjects() + 1) / normalizer_;
}

double penalty_value(const EffectsDecomposition& dec, const PenaltySpec& pen) {
  double s = 0.0;
  if (pen.lambda1 > 0.0) s += pen.lambda1 * weighted_l1(dec.common, common_weights(pen));
  for (std::size_t k = 0; k < dec.unique.size(); ++k) {
    if (pen.lambda2[k] > 0.0) s += pen.lambda2[k] * weighted_l1(dec.unique[k], unique_weights(pen, k));
  }
  return s;
}

double objective(const MultiVarProblem& problem, const EffectsDecomposition& dec, const PenaltySpec& pen) {
  if (dec.num_subjects() != problem.num_subjects() || dec.common.rows() != problem.dim() ||
      dec.common.cols() != problem.num_cols()) {
    throw DimensionError("decomposition does not match the problem dimensions");
  }
  pen.validate(problem.num_subjects(), problem.dim(), problem.num_cols());
  return problem.loss(dec) + penalty_value(dec, pen);
}

Matrix prox_weighted_l1(const Matrix& v, double threshold, const Matrix& w) {
  if (threshold < 0.0) throw SpecError("threshold must be >= 0");
  if (w.rows() != v.rows() || w.cols() != v.cols()) throw DimensionError("weight matrix shape mismatch");
  Matrix out = v;
  soft_threshold_in_place(out, threshold, &w);
  return out;
}

Matrix prox_weighted_l1(const Matrix& v, double threshold) {
  if (threshold < 0.0) throw SpecError("threshold must be >= 0");
  Matrix out = v;
  soft_threshold_in_place(out, threshold, nullptr);
  return out;
}

SolveResult fista_solve(const MultiVarProblem& problem, const PenaltySpec& pen, const SolverConfig& cfg,
                        const std::optional<EffectsDecomposition>& warm_start) {
  cfg.validate();
  const int d = problem.dim();
  const int cols = problem.num_cols();
  const int k_subjects = problem.num_subjects();
  pen.validate(k_subjects, d, cols);

  EffectsDecomposition x = EffectsDecomposition::zeros(d, cols, k_subjects);
  if (warm_start) {
    if (warm_start->num_subjects() != k_subjects || warm_start->common.rows() != d ||
        warm_start->common.cols() != cols) {
      throw DimensionError("warm start does not match the problem dimensions");
    }
    x = *warm_start;
    if (!common_active(pen.blocks)) x.common.setZero();
    if (!unique_active(pen.blocks)) {
      for (auto& u : x.unique) u.setZero();
    }
  }

  double lipschitz = problem.lipschitz_bound(pen.blocks);
  if (!(lipschitz > 0.0)) lipschitz = 1.0;  // zero design: gradient is constant

  EffectsDecomposition y = x;
  EffectsDecomposition grad = EffectsDecomposition::zeros(d, cols, k_subjects);
  EffectsDecomposition cand = x;
  EffectsDecomposition delta = x;

  double f_x = problem.loss_from_gram(x) + penalty_value(x, pen);
  double t = 1.0;
  SolverDiagnostics diag;

  auto check_finite = [&](double value, int it) {
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "FISTA diverged at iteration " << it << " with step " << 1.0 / lipschitz;
      throw DivergenceError(msg.str(), it, 1.0 / lipschitz);
    }
  };
  check_finite(f_x, 0);

  // One proximal step from `from`; with backtracking, grows L until the
  // quadratic upper model holds at the candidate.
  auto step_from = [&](const EffectsDecomposition& from) {
    const double f_from = problem.loss_and_gradient(from, grad, pen.blocks);
    while (true) {
      prox_step(from, grad, lipschitz, pen, cand);
      if (cfg.step_rule != StepRule::backtracking) break;
      block_diff(cand, from, delta);
      const double model = f_from + block_inner(grad, delta) + 0.5 * lipschitz * block_inner(delta, delta);
      if (problem.loss_from_gram(cand) <= model * (1.0 + 1e-12) + 1e-15) break;
      lipschitz *= cfg.backtrack_factor;
    }
    return problem.loss_from_gram(cand) + penalty_value(cand, pen);
  };

  constexpr int kWindow = 10;
  std::array<double, kWindow> history{};
  const double f_start = f_x;
  int it = 1;
  for (; it <= cfg.max_iter; ++it) {
    double f_cand = step_from(y);
    check_finite(f_cand, it);
    const bool restarted = f_cand > f_x;
    if (restarted) {
      // momentum overshot: restart from the last accepted iterate
      ++diag.restarts;
      t = 1.0;
      f_cand = step_from(x);
      check_finite(f_cand, it);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    const bool accept = f_cand <= f_x;
    if (accept) {
      y.common = cand.common + momentum * (cand.common - x.common);
      for (int k = 0; k < k_subjects; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        y.unique[kk] = cand.unique[kk] + momentum * (cand.unique[kk] - x.unique[kk]);
      }
      std::swap(x, cand);
      f_x = f_cand;
      t = t_next;
    } else {
      y = x;
      t = 1.0;
    }
    // single momentum steps can stall briefly, so the relative change is
    // averaged over a trailing window of iterations
    history[static_cast<std::size_t>(it % kWindow)] = f_x;
    const double past = it >= kWindow ? history[static_cast<std::size_t>((it + 1) % kWindow)] : f_start;
    const int span = std::min(it, kWindow - 1);
    const double avg_change = (past - f_x) / span;
    if (!restarted && avg_change <= cfg.tol * std::max(std::abs(f_x), std::numeric_limits<double>::min())) {
      diag.converged = true;
      break;
    }
  }

  diag.iterations = std::min(it, cfg.max_iter);
  diag.objective = f_x;
  diag.step = 1.0 / lipschitz;
  diag.cancellation = has_cancellation(x);
  return SolveResult{std::move(x), diag};
}

LambdaMax lambda_max(const MultiVarProblem& problem, const std::optional<AdaptiveWeights>& weights) {
  const double scale = 2.0 / problem.normalizer();
  LambdaMax out;
  Matrix pooled = Matrix::Zero(problem.dim(), problem.num_cols());
  for (int k = 0; k < problem.num_subjects(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Matrix g = scale * problem.cross(kk);
    pooled += g;
    out.lambda2.push_back(max_weighted_ratio(g, weights ? &weights->unique_weights[kk] : nullptr));
  }
  out.lambda1 = max_weighted_ratio(pooled, weights ? &weights->common_weights : nullptr);
  return out;
}

double lambda1_max_given(const MultiVarProblem& problem, const PenaltySpec& pen, const SolverConfig& cfg) {
  PenaltySpec restricted = pen;
  restricted.blocks = ActiveBlocks::unique_only;
  const auto sol = fista_solve(problem, restricted, cfg);
  EffectsDecomposition grad;
  problem.loss_and_gradient(sol.fit, grad, ActiveBlocks::common_and_unique);
  return max_weighted_ratio(grad.common, common_weights(pen));
}

std::vector<double> lambda2_max_given(const MultiVarProblem& problem, const PenaltySpec& pen,
                                      const SolverConfig& cfg) {
  PenaltySpec restricted = pen;
  restricted.blocks = ActiveBlocks::common_only;
  const auto sol = fista_solve(problem, restricted, cfg);
  EffectsDecomposition grad;
  problem.loss_and_gradient(sol.fit, grad, ActiveBlocks::common_and_unique);
  std::vector<double> out;
  for (std::size_t k = 0; k < grad.unique.size(); ++k) {
    out.push_back(max_weighted_ratio(grad.unique[k], unique_weights(pen, k)));
  }
  return out;
}

std::vector<double> LambdaGrid::lambda2_for(std::size_t i2) const {
  std::vector<double> out;
  out.reserve(lambda2_max.size());
  for (double m : lambda2_max) out.push_back(lambda2_values.at(i2) * m);
  return out;
}

PenaltySpec LambdaGrid::penalty(std::size_t i1, std::size_t i2, const std::optional<AdaptiveWeights>& weights,
                                ActiveBlocks blocks) const {
  return PenaltySpec{lambda1_values.at(i1), lambda2_for(i2), weights, blocks};
}

std::vector<double> log_spaced_descending(double hi, double ratio, int n) {
  if (n < 1) throw SpecError("grid size must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw SpecError("grid ratio must lie in (0, 1)");
  if (!(hi > 0.0)) throw SpecError("grid maximum must be positive");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(n == 1 ? hi : hi * std::pow(ratio, static_cast<double>(i) / (n - 1)));
  }
  return out;
}

LambdaGrid build_grid(const MultiVarProblem& problem, const std::optional<AdaptiveWeights>& weights, int n1, int n2,
                      double ratio) {
  return build_grid(problem, weights, n1, n2, ratio, ratio);
}

LambdaGrid build_grid(const MultiVarProblem& problem, const std::optional<AdaptiveWeights>& weights, int n1, int n2,
                      double ratio1, double ratio2) {
  if (n1 < 1 || n2 < 1) throw SpecError("grid sizes must be >= 1");
  const auto lm = lambda_max(problem, weights);
  // All-zero data has lambda max 0: any positive level keeps the zero solution.
  LambdaGrid grid;
  grid.lambda1_values = log_spaced_descending(lm.lambda1 > 0.0 ? lm.lambda1 : 1.0, ratio1, n1);
  grid.lambda2_values = log_spaced_descending(1.0, ratio2, n2);
  for (double l2 : lm.lambda2) grid.lambda2_max.push_back(l2 > 0.0 ? l2 : 1.0);
  return grid;
}

PathResult fit_path(const MultiVarProblem& problem, const LambdaGrid& grid,
                    const std::optional<AdaptiveWeights>& weights, const SolverConfig& cfg, ActiveBlocks blocks) {
  if (grid.num_cells() == 0) throw SpecError("lambda grid is empty");
  PathResult out{grid, {}};
  out.cells.resize(grid.num_cells());
  const std::size_t n1 = grid.lambda1_values.size();
  const std::size_t n2 = grid.lambda2_values.size();
  for (std::size_t i1 = 0; i1 < n1; ++i1) {
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
      std::optional<EffectsDecomposition> warm;
      if (i2 > 0) {
        warm = out.cells[grid.cell_index(i1, i2 - 1)].fit;
      } else if (i1 > 0) {
        warm = out.cells[grid.cell_index(i1 - 1, 0)].fit;
      }
      out.cells[grid.cell_index(i1, i2)] = fista_solve(problem, grid.penalty(i1, i2, weights, blocks), cfg, warm);
    }
  }
  return out;
}

}  // namespace multivar
