#include "multivar/cv.hpp"

#include "multivar/csv.hpp"
#include "multivar/error.hpp"
#include "multivar/parallel.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <sstream>

namespace multivar {

namespace {

struct CellAccumulator {
  std::vector<double> msfe_sum;
  std::vector<int> folds_scored;
  bool valid = true;
  std::string reason;
};

std::vector<CellAccumulator> make_accumulators(std::size_t cells, int k) {
  CellAccumulator proto;
  proto.msfe_sum.assign(static_cast<std::size_t>(k), 0.0);
  proto.folds_scored.assign(static_cast<std::size_t>(k), 0);
  return std::vector<CellAccumulator>(cells, proto);
}

// Solves every grid cell on `problem`, calling `score(cell, fit)` for each
// success. `previous` holds warm starts per cell from an earlier pass (may be
// empty) and is overwritten with this pass's solutions.
void solve_cells(const MultiVarProblem& problem, const LambdaGrid& grid,
                 const std::optional<AdaptiveWeights>& weights, const CvOptions& opts,
                 std::vector<std::optional<EffectsDecomposition>>& previous, std::vector<CellAccumulator>& acc,
                 const std::string& label, const std::function<void(std::size_t, const EffectsDecomposition&)>& score) {
  const std::size_t n1 = grid.lambda1_values.size();
  const std::size_t n2 = grid.lambda2_values.size();
  std::vector<std::optional<EffectsDecomposition>> current(grid.num_cells());
  for (std::size_t i1 = 0; i1 < n1; ++i1) {
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
      const std::size_t cell = grid.cell_index(i1, i2);
      std::optional<EffectsDecomposition> warm;
      if (!previous.empty() && previous[cell]) {
        warm = previous[cell];
      } else if (i2 > 0 && current[grid.cell_index(i1, i2 - 1)]) {
        warm = current[grid.cell_index(i1, i2 - 1)];
      } else if (i1 > 0 && current[grid.cell_index(i1 - 1, 0)]) {
        warm = current[grid.cell_index(i1 - 1, 0)];
      }
      try {
        auto sol = fista_solve(problem, grid.penalty(i1, i2, weights, opts.blocks), opts.solver, warm);
        score(cell, sol.fit);
        current[cell] = std::move(sol.fit);
      } catch (const std::exception& e) {
        if (acc[cell].valid) {
          acc[cell].valid = false;
          acc[cell].reason = label + ": " + e.what();
        }
      }
    }
  }
  previous = std::move(current);
}

CvResult finish(const MultiSubjectSeries& data, const LambdaGrid& grid, const std::optional<AdaptiveWeights>& weights,
                const CvOptions& opts, std::vector<CellAccumulator>& acc) {
  CvResult out;
  out.grid = grid;
  const auto k = static_cast<std::size_t>(data.num_subjects());
  for (std::size_t i1 = 0; i1 < grid.lambda1_values.size(); ++i1) {
    for (std::size_t i2 = 0; i2 < grid.lambda2_values.size(); ++i2) {
      auto& a = acc[grid.cell_index(i1, i2)];
      CvCell cell;
      cell.i1 = i1;
      cell.i2 = i2;
      cell.lambda1 = grid.lambda1_values[i1];
      cell.lambda2 = grid.lambda2_values[i2];
      cell.valid = a.valid;
      cell.reason = a.reason;
      double total = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        const double m = a.folds_scored[s] > 0 ? a.msfe_sum[s] / a.folds_scored[s] : 0.0;
        cell.subject_msfe.push_back(m);
        total += m;
      }
      cell.msfe = cell.valid ? total / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
      out.table.cells.push_back(std::move(cell));
    }
  }
  out.table.selected = select_cell(out.table.cells);
  const auto& best = out.table.best();
  out.selected_penalty = grid.penalty(best.i1, best.i2, weights, opts.blocks);
  out.refit = fista_solve(MultiVarProblem::from_series(data, opts.p), out.selected_penalty, opts.solver);
  return out;
}

}  // namespace

CvScheme parse_cv_scheme(const std::string& name) {
  if (name == "bcv" || name == "blocked") return CvScheme::blocked;
  if (name == "rwcv" || name == "rolling") return CvScheme::rolling_window;
  throw ValidationError("unknown cross-validation scheme '" + name + "' (expected bcv|rwcv)");
}

std::string to_string(CvScheme s) { return s == CvScheme::blocked ? "bcv" : "rwcv"; }

std::vector<Block> blocked_folds(int t_len, int folds, int p) {
  if (folds < 2) throw SpecError("blocked CV needs at least 2 folds");
  if (t_len < folds * (p + 2)) {
    std::ostringstream msg;
    msg << "series of length " << t_len << " is too short for " << folds << " folds at lag order " << p
        << " (needs " << folds * (p + 2) << ")";
    throw DimensionError(msg.str());
  }
  const int base = t_len / folds;
  const int extra = t_len % folds;
  std::vector<Block> out;
  int start = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = base + (f >= folds - extra ? 1 : 0);
    out.push_back(Block{start, start + size});
    start += size;
  }
  return out;
}

FoldPlan make_blocked_folds(std::span<const int> t_lens, int folds, int p) {
  FoldPlan plan;
  plan.scheme = CvScheme::blocked;
  for (int t : t_lens) plan.blocks.push_back(blocked_folds(t, folds, p));
  return plan;
}

RegressionForm training_form(const SubjectSeries& series, int p, const Block& test, int gap) {
  const int lo = test.begin - gap;
  const int hi = test.end + gap;
  return build_regression(series, p, [&](int t) { return t < lo || t - p >= hi; });
}

ForecastError forecast_errors(const Matrix& phi_stacked, const Matrix& data, int p, const Block& block) {
  ForecastError err;
  err.dim = static_cast<int>(data.rows());
  const int end = std::min<int>(block.end, static_cast<int>(data.cols()));
  for (int t = std::max(block.begin, p); t < end; ++t) {
    err.sse += (data.col(t) - phi_stacked * lag_vector(data, t, p)).squaredNorm();
    ++err.points;
  }
  return err;
}

double forecast_msfe(const Matrix& phi_stacked, const Matrix& data, int p, const Block& block) {
  return forecast_errors(phi_stacked, data, p, block).msfe();
}

std::size_t argmin_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

std::size_t select_cell(const std::vector<CvCell>& cells) {
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].valid) continue;
    const auto& cand = cells[c];
    if (!best) {
      best = c;
      continue;
    }
    const auto& cur = cells[*best];
    const bool sparser = cand.lambda1 > cur.lambda1 || (cand.lambda1 == cur.lambda1 && cand.lambda2 > cur.lambda2);
    if (cand.msfe < cur.msfe || (cand.msfe == cur.msfe && sparser)) best = c;
  }
  if (!best) throw std::runtime_error("cross-validation failed: no grid cell produced a valid fit");
  return *best;
}

void write_cv_table_csv(std::ostream& os, const CvTable& table) {
  os << "cell,i1,i2,lambda1,lambda2,msfe,valid,selected";
  const std::size_t k = table.cells.empty() ? 0 : table.cells.front().subject_msfe.size();
  for (std::size_t s = 0; s < k; ++s) os << ",msfe_subject_" << (s + 1);
  os << '\n';
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    const auto& cell = table.cells[c];
    os << c << ',' << cell.i1 << ',' << cell.i2 << ',' << format_double(cell.lambda1) << ','
       << format_double(cell.lambda2) << ',' << format_double(cell.msfe) << ',' << (cell.valid ? 1 : 0) << ','
       << (c == table.selected ? 1 : 0);
    for (double m : cell.subject_msfe) os << ',' << format_double(m);
    os << '\n';
  }
}

CvResult bcv_select(const MultiSubjectSeries& data, const LambdaGrid& grid,
                    const std::optional<AdaptiveWeights>& weights, const FoldPlan& plan, const CvOptions& opts) {
  if (plan.scheme != CvScheme::blocked) throw SpecError("bcv_select needs a blocked fold plan");
  const int k = data.num_subjects();
  if (static_cast<int>(plan.blocks.size()) != k) throw DimensionError("fold plan does not match subject count");
  const int folds = plan.num_folds();
  for (const auto& b : plan.blocks) {
    if (static_cast<int>(b.size()) != folds) throw DimensionError("every subject needs the same fold count");
  }

  // one accumulator set per fold, reduced in fold order so the result does
  // not depend on scheduling
  std::vector<std::vector<CellAccumulator>> per_fold(static_cast<std::size_t>(folds));
  parallel_for(static_cast<std::size_t>(folds), opts.workers, [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    auto& acc = per_fold[fi];
    acc = make_accumulators(grid.num_cells(), k);
    std::vector<RegressionForm> forms;
    for (int s = 0; s < k; ++s) {
      forms.push_back(training_form(data[static_cast<std::size_t>(s)], opts.p,
                                    plan.blocks[static_cast<std::size_t>(s)][fi], opts.gap));
    }
    const MultiVarProblem problem(std::move(forms), opts.p);
    std::vector<std::optional<EffectsDecomposition>> warm;
    solve_cells(problem, grid, weights, opts, warm, acc, "fold " + std::to_string(f + 1),
                [&](std::size_t cell, const EffectsDecomposition& fit) {
                  for (int s = 0; s < k; ++s) {
                    const auto ss = static_cast<std::size_t>(s);
                    const auto err = forecast_errors(fit.total(ss), data[ss].data, opts.p, plan.blocks[ss][fi]);
                    if (err.points > 0) {
                      acc[cell].msfe_sum[ss] += err.msfe();
                      acc[cell].folds_scored[ss] += 1;
                    }
                  }
                });
  });

  auto acc = make_accumulators(grid.num_cells(), k);
  for (const auto& fold_acc : per_fold) {
    for (std::size_t c = 0; c < acc.size(); ++c) {
      for (std::size_t s = 0; s < acc[c].msfe_sum.size(); ++s) {
        acc[c].msfe_sum[s] += fold_acc[c].msfe_sum[s];
        acc[c].folds_scored[s] += fold_acc[c].folds_scored[s];
      }
      if (acc[c].valid && !fold_acc[c].valid) {
        acc[c].valid = false;
        acc[c].reason = fold_acc[c].reason;
      }
    }
  }
  return finish(data, grid, weights, opts, acc);
}

int default_rwcv_window(const MultiSubjectSeries& data) { return data.min_length() / 2; }

CvResult rwcv_select(const MultiSubjectSeries& data, const LambdaGrid& grid,
                     const std::optional<AdaptiveWeights>& weights, int window, const CvOptions& opts) {
  const int k = data.num_subjects();
  if (window < opts.p + 2 || window >= data.min_length()) {
    std::ostringstream msg;
    msg << "rolling window " << window << " must satisfy " << opts.p + 2 << " <= window < " << data.min_length();
    throw DimensionError(msg.str());
  }
  int max_origins = 0;
  for (const auto& s : data.subjects()) max_origins = std::max(max_origins, s.length() - window);

  auto acc = make_accumulators(grid.num_cells(), k);
  std::vector<std::optional<EffectsDecomposition>> warm;
  for (int o = 0; o < max_origins; ++o) {
    std::vector<RegressionForm> forms;
    std::vector<bool> active;
    for (int s = 0; s < k; ++s) {
      const auto& series = data[static_cast<std::size_t>(s)];
      const bool on = o < series.length() - window;
      active.push_back(on);
      forms.push_back(build_regression(series, opts.p, [&](int t) { return on && t >= o + opts.p && t < o + window; }));
    }
    const MultiVarProblem problem(std::move(forms), opts.p);
    solve_cells(problem, grid, weights, opts, warm, acc, "origin " + std::to_string(o + window),
                [&](std::size_t cell, const EffectsDecomposition& fit) {
                  for (int s = 0; s < k; ++s) {
                    const auto ss = static_cast<std::size_t>(s);
                    if (!active[ss]) continue;
                    const auto err = forecast_errors(fit.total(ss), data[ss].data, opts.p,
                                                     Block{o + window, o + window + 1});
                    acc[cell].msfe_sum[ss] += err.msfe();
                    acc[cell].folds_scored[ss] += 1;
                  }
                });
  }
  return finish(data, grid, weights, opts, acc);
}

std::vector<double> single_subject_bcv(const SubjectSeries& series, int p, std::span<const Block> folds,
                                       const CandidateFitter& fit, std::size_t num_candidates, int gap) {
  std::vector<double> sum(num_candidates, 0.0);
  int scored = 0;
  for (const auto& block : folds) {
    const auto models = fit(training_form(series, p, block, gap));
    if (models.size() != num_candidates) throw DimensionError("candidate fitter returned the wrong count");
    bool any = false;
    for (std::size_t c = 0; c < num_candidates; ++c) {
      const auto err = forecast_errors(models[c], series.data, p, block);
      if (err.points > 0) {
        sum[c] += err.msfe();
        any = true;
      }
    }
    if (any) ++scored;
  }
  for (double& s : sum) s /= std::max(scored, 1);
  return sum;
}

}  // namespace multivar
