#include "multivar/initial_estimates.hpp"

#include "multivar/cv.hpp"
#include "multivar/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace multivar {

namespace {

int usable_folds(const SubjectSeries& s, int requested, int p) {
  // shrink the fold count for series too short to carry `requested` blocks
  int f = requested;
  while (f > 2 && s.length() < f * (p + 2)) --f;
  return f;
}

}  // namespace

InitialEstimates initial_ml(const MultiSubjectSeries& data, int p) {
  InitialEstimates out;
  out.method = InitialMethod::maximum_likelihood;
  for (const auto& s : data.subjects()) out.phis.push_back(fit_ols(s, p).model.stacked());
  return out;
}

Matrix fit_ridge(const RegressionForm& reg, double gamma) {
  if (gamma < 0.0) throw SpecError("ridge penalty must be >= 0");
  Matrix gram = reg.z * reg.z.transpose();
  gram.diagonal().array() += gamma;
  const Matrix rhs = reg.z * reg.y.transpose();
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
    return cod.solve(rhs).transpose();
  }
  return ldlt.solve(rhs).transpose();
}

std::vector<double> default_ridge_grid(const RegressionForm& reg, int n) {
  const double dp = static_cast<double>(reg.z.rows());
  double scale = reg.z.squaredNorm() / dp;  // trace(Z Z^T) / dp
  if (!(scale > 0.0)) scale = 1.0;
  return log_spaced_descending(1e2 * scale, 1e-6, n);
}

InitialEstimates initial_ridge(const MultiSubjectSeries& data, int p, const std::optional<std::vector<double>>& ridge_grid,
                               const InitialOptions& opts) {
  if (ridge_grid) {
    if (ridge_grid->empty()) throw SpecError("ridge grid must be non-empty");
    for (double g : *ridge_grid) {
      if (!(g > 0.0)) throw SpecError("ridge grid values must be positive");
    }
  }
  InitialEstimates out;
  out.method = InitialMethod::ridge;
  for (const auto& s : data.subjects()) {
    const auto full = build_regression(s, p);
    const auto grid = ridge_grid ? *ridge_grid : default_ridge_grid(full, opts.ridge_grid_size);
    const auto folds = blocked_folds(s.length(), usable_folds(s, opts.folds, p), p);
    const auto scores = single_subject_bcv(
        s, p, folds,
        [&](const RegressionForm& train) {
          std::vector<Matrix> fits;
          for (double g : grid) fits.push_back(fit_ridge(train, g));
          return fits;
        },
        grid.size());
    // ties resolve to the earliest (strongest) penalty for descending grids
    const double gamma = grid[argmin_first(scores)];
    out.phis.push_back(fit_ridge(full, gamma));
    out.tuning.push_back(gamma);
  }
  return out;
}

std::vector<Matrix> lasso_path(const RegressionForm& reg, int p, const std::vector<double>& lambdas,
                               const std::optional<Matrix>& weights, const SolverConfig& cfg) {
  const MultiVarProblem problem({reg}, p);
  std::optional<AdaptiveWeights> aw;
  if (weights) {
    aw = AdaptiveWeights{Matrix::Ones(weights->rows(), weights->cols()), {*weights}, 1.0, kDefaultWeightCap};
  }
  std::vector<Matrix> out;
  std::optional<EffectsDecomposition> warm;
  for (double l : lambdas) {
    PenaltySpec pen{0.0, {l}, aw, ActiveBlocks::unique_only};
    auto sol = fista_solve(problem, pen, cfg, warm);
    out.push_back(sol.fit.unique.front());
    warm = std::move(sol.fit);
  }
  return out;
}

SingleSubjectLasso cv_lasso_single(const SubjectSeries& series, int p, const std::optional<Matrix>& weights,
                                   int grid_size, double ratio, int folds, const SolverConfig& cfg) {
  const auto full = build_regression(series, p);
  const MultiVarProblem full_problem({full}, p);
  std::optional<AdaptiveWeights> aw;
  if (weights) {
    aw = AdaptiveWeights{Matrix::Ones(weights->rows(), weights->cols()), {*weights}, 1.0, kDefaultWeightCap};
  }
  const double lmax = lambda_max(full_problem, aw).lambda2.front();
  const auto lambdas = log_spaced_descending(lmax > 0.0 ? lmax : 1.0, ratio, grid_size);
  const auto blocks = blocked_folds(series.length(), usable_folds(series, folds, p), p);
  const auto scores = single_subject_bcv(
      series, p, blocks, [&](const RegressionForm& train) { return lasso_path(train, p, lambdas, weights, cfg); },
      lambdas.size());
  const double chosen = lambdas[argmin_first(scores)];
  PenaltySpec pen{0.0, {chosen}, aw, ActiveBlocks::unique_only};
  return SingleSubjectLasso{fista_solve(full_problem, pen, cfg).fit.unique.front(), chosen};
}

InitialEstimates initial_lasso(const MultiSubjectSeries& data, int p, const InitialOptions& opts) {
  if (opts.lasso_grid_size < 1) throw SpecError("lasso grid must be non-empty");
  InitialEstimates out;
  out.method = InitialMethod::lasso;
  for (const auto& s : data.subjects()) {
    auto fit = cv_lasso_single(s, p, std::nullopt, opts.lasso_grid_size, opts.lasso_ratio, opts.folds, opts.solver);
    out.phis.push_back(std::move(fit.phi));
    out.tuning.push_back(fit.lambda);
  }
  return out;
}

OlsInference ols_inference(const RegressionForm& reg, int p) {
  const auto fit = fit_ols(reg, p);
  const int n = reg.num_obs();
  const int q = static_cast<int>(reg.z.rows());
  const int df = n - q;
  if (df < 1) {
    throw DimensionError("t-statistics need more observations (" + std::to_string(n) + ") than regressors (" +
                         std::to_string(q) + ")");
  }
  OlsInference out;
  out.phi = fit.model.stacked();
  out.df = df;
  const Matrix resid = reg.y - out.phi * reg.z;
  const Vector sigma2 = resid.rowwise().squaredNorm() / static_cast<double>(df);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(reg.z * reg.z.transpose());
  const Vector inv_diag = cod.pseudoInverse().diagonal();

  boost::math::students_t dist(static_cast<double>(df));
  out.t_stat.resize(out.phi.rows(), out.phi.cols());
  out.p_value.resize(out.phi.rows(), out.phi.cols());
  for (Eigen::Index i = 0; i < out.phi.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.phi.cols(); ++j) {
      const double se = std::sqrt(std::max(0.0, sigma2(i) * inv_diag(j)));
      double t = 0.0;
      if (se > 0.0) {
        t = out.phi(i, j) / se;
      } else if (out.phi(i, j) != 0.0) {
        t = std::copysign(std::numeric_limits<double>::infinity(), out.phi(i, j));
      }
      out.t_stat(i, j) = t;
      out.p_value(i, j) = std::isinf(t) ? 0.0 : 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
  }
  return out;
}

std::vector<VarModel> ml_thresholded(const MultiSubjectSeries& data, int p, double alpha_level) {
  if (!(alpha_level > 0.0)) throw SpecError("alpha_level must be positive");
  std::vector<VarModel> out;
  for (const auto& s : data.subjects()) {
    const auto inf = ols_inference(build_regression(s, p), p);
    Matrix phi = inf.phi;
    if (alpha_level < 1.0) {
      phi = (inf.p_value.array() < alpha_level).select(inf.phi, 0.0);
    }
    out.push_back(VarModel::from_stacked(phi, p));
  }
  return out;
}

}  // namespace multivar
