#include "multivar/pipeline.hpp"

#include "multivar/error.hpp"
#include "multivar/weights.hpp"

#include <array>
#include <utility>

namespace multivar {

namespace {

constexpr std::array<std::pair<Method, const char*>, 8> kMethodNames{{
    {Method::multivar_standard, "multivar-standard"},
    {Method::multivar_adaptive_ml, "multivar-adaptive-ml"},
    {Method::multivar_adaptive_ridge, "multivar-adaptive-ridge"},
    {Method::multivar_adaptive_lasso, "multivar-adaptive-lasso"},
    {Method::k1_ml_thresh, "k1-ml-thresh"},
    {Method::k1_adaptive_ml, "k1-adaptive-ml"},
    {Method::k1_adaptive_ridge, "k1-adaptive-ridge"},
    {Method::k1_adaptive_lasso, "k1-adaptive-lasso"},
}};

std::optional<InitialMethod> initial_method_of(Method m) {
  switch (m) {
    case Method::multivar_adaptive_ml:
    case Method::k1_adaptive_ml:
      return InitialMethod::maximum_likelihood;
    case Method::multivar_adaptive_ridge:
    case Method::k1_adaptive_ridge:
      return InitialMethod::ridge;
    case Method::multivar_adaptive_lasso:
    case Method::k1_adaptive_lasso:
      return InitialMethod::lasso;
    default:
      return std::nullopt;
  }
}

MethodResult fit_multivar(const MultiSubjectSeries& data, const MethodConfig& cfg) {
  MethodResult out;
  out.method = cfg.method;
  std::optional<AdaptiveWeights> weights;
  if (auto init = initial_method_of(cfg.method)) {
    const auto initials = initial_estimates(data, *init, cfg.p, cfg.initial);
    weights = build_adaptive_weights(initials, sample_size_weights(data, cfg.p), cfg.alpha);
  }
  const auto problem = MultiVarProblem::from_series(data, cfg.p);
  auto grid = build_grid(problem, weights, cfg.grid_n1, cfg.grid_n2, cfg.grid_ratio,
                         cfg.grid_ratio2 > 0.0 ? cfg.grid_ratio2 : cfg.grid_ratio);

  if (cfg.fixed) {
    PenaltySpec pen{cfg.fixed->lambda1, {}, weights, ActiveBlocks::common_and_unique};
    for (double m : grid.lambda2_max) pen.lambda2.push_back(cfg.fixed->lambda2_fraction * m);
    auto sol = fista_solve(problem, pen, cfg.solver);
    out.lambda1 = pen.lambda1;
    out.lambda2_fraction = cfg.fixed->lambda2_fraction;
    out.lambda2 = pen.lambda2;
    out.totals = sol.fit.totals();
    out.decomposition = std::move(sol.fit);
    out.diagnostics = sol.diagnostics;
    out.grid = std::move(grid);
    return out;
  }

  CvOptions opts;
  opts.p = cfg.p;
  opts.solver = cfg.solver;
  opts.workers = cfg.workers;
  CvResult cv;
  if (cfg.cv == CvScheme::blocked) {
    std::vector<int> lens;
    for (const auto& s : data.subjects()) lens.push_back(s.length());
    cv = bcv_select(data, grid, weights, make_blocked_folds(lens, cfg.folds, cfg.p), opts);
  } else {
    const int window = cfg.rwcv_window > 0 ? cfg.rwcv_window : default_rwcv_window(data);
    cv = rwcv_select(data, grid, weights, window, opts);
  }
  const auto& best = cv.table.best();
  out.lambda1 = best.lambda1;
  out.lambda2_fraction = best.lambda2;
  out.lambda2 = cv.selected_penalty.lambda2;
  out.totals = cv.refit.fit.totals();
  out.decomposition = std::move(cv.refit.fit);
  out.diagnostics = cv.refit.diagnostics;
  out.cv_table = std::move(cv.table);
  out.grid = std::move(cv.grid);
  return out;
}

MethodResult fit_k1(const MultiSubjectSeries& data, const MethodConfig& cfg) {
  MethodResult out;
  out.method = cfg.method;
  if (cfg.method == Method::k1_ml_thresh) {
    for (const auto& m : ml_thresholded(data, cfg.p, cfg.ml_alpha_level)) out.totals.push_back(m.stacked());
    out.zero_tol = 0.0;
    return out;
  }
  const auto init = *initial_method_of(cfg.method);
  const auto initials = initial_estimates(data, init, cfg.p, cfg.initial);
  for (std::size_t k = 0; k < initials.phis.size(); ++k) {
    const Matrix w = single_subject_weights(initials.phis[k], cfg.alpha);
    if (cfg.fixed) {
      const auto reg = build_regression(data[k], cfg.p);
      const MultiVarProblem problem({reg}, cfg.p);
      AdaptiveWeights aw{Matrix::Ones(w.rows(), w.cols()), {w}, cfg.alpha, kDefaultWeightCap};
      if (!cfg.fixed->subject_lambda.empty() && cfg.fixed->subject_lambda.size() != initials.phis.size()) {
        throw ValidationError("expected one fixed lambda per subject");
      }
      const double level = cfg.fixed->subject_lambda.empty()
                               ? cfg.fixed->lambda2_fraction * lambda_max(problem, aw).lambda2.front()
                               : cfg.fixed->subject_lambda[k];
      PenaltySpec pen{0.0, {level}, aw, ActiveBlocks::unique_only};
      out.totals.push_back(fista_solve(problem, pen, cfg.solver).fit.unique.front());
      out.subject_lambda.push_back(level);
      continue;
    }
    auto fit = cv_lasso_single(data[k], cfg.p, w, cfg.k1_grid_size, cfg.k1_grid_ratio, cfg.folds, cfg.solver);
    out.totals.push_back(std::move(fit.phi));
    out.subject_lambda.push_back(fit.lambda);
  }
  return out;
}

}  // namespace

Method parse_method(const std::string& name) {
  for (const auto& [m, n] : kMethodNames) {
    if (name == n) return m;
  }
  throw ValidationError("unknown method '" + name + "'");
}

std::string to_string(Method m) {
  for (const auto& [mm, n] : kMethodNames) {
    if (mm == m) return n;
  }
  return "?";
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& [m, n] : kMethodNames) out.push_back(m);
  return out;
}

bool is_multivar(Method m) {
  return m == Method::multivar_standard || m == Method::multivar_adaptive_ml || m == Method::multivar_adaptive_ridge ||
         m == Method::multivar_adaptive_lasso;
}

InitialEstimates initial_estimates(const MultiSubjectSeries& data, InitialMethod m, int p, const InitialOptions& opts) {
  switch (m) {
    case InitialMethod::maximum_likelihood: return initial_ml(data, p);
    case InitialMethod::ridge: return initial_ridge(data, p, std::nullopt, opts);
    case InitialMethod::lasso: return initial_lasso(data, p, opts);
  }
  throw SpecError("unknown initial estimator");
}

MethodResult fit_method(const MultiSubjectSeries& data, const MethodConfig& cfg) {
  return is_multivar(cfg.method) ? fit_multivar(data, cfg) : fit_k1(data, cfg);
}

MultiSubjectSeries centered(const MultiSubjectSeries& data, std::vector<Vector>* means) {
  std::vector<SubjectSeries> subjects = data.subjects();
  if (means) means->clear();
  for (auto& s : subjects) {
    auto m = center_in_place(s);
    if (means) means->push_back(std::move(m));
  }
  return MultiSubjectSeries(std::move(subjects));
}

}  // namespace multivar
