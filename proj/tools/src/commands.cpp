#include "multivar_cli/commands.hpp"

#include "multivar/csv.hpp"
#include "multivar/error.hpp"
#include "multivar/metrics.hpp"
#include "multivar/parallel.hpp"
#include "multivar/pipeline.hpp"
#include "multivar/simulator.hpp"
#include "multivar_cli/benchmark.hpp"
#include "multivar_cli/bundle.hpp"
#include "multivar_cli/report.hpp"
#include "multivar_cli/svg.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace multivar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kWorkersEnv = "MULTIVAR_WORKERS";

// Options shared by `fit` and `benchmark`.
struct FitOptions {
  std::string cv = "bcv";
  int folds = 10;
  int grid_n1 = 10;
  int grid_n2 = 10;
  double grid_ratio = 0.01;
  double grid_ratio2 = 0.1;
  int rwcv_window = 0;
  double alpha = 1.0;
  int lag = 1;
  double ml_alpha = 0.05;
  int max_iter = 5000;
  double tol = 1e-6;
  bool backtracking = false;
};

struct SimulateOptions {
  std::string condition;
  std::vector<double> pi_p;
  std::vector<double> pi_i;
  std::optional<double> common;
  std::optional<double> unique;
  int t_len = 0;
  int d = 10;
  int k = 15;
  std::uint64_t seed = 1;
  int burn_in = kDefaultBurnIn;
  double lb = 0.1;
  double ub = 0.9;
  double target = 0.95;
  bool random_sign = false;
  std::string out;
};

struct FitCommand {
  std::string data;
  std::string method = "multivar-adaptive-lasso";
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::vector<double> subject_lambda;
  bool standardize = false;
  bool heatmaps = false;
  std::string out;
};

struct BenchmarkCommand {
  std::vector<std::string> conditions{"no", "low", "high"};
  std::vector<int> t_lens{30, 50, 100};
  std::vector<std::string> methods;
  int reps = 20;
  std::uint64_t seed = 1;
  int d = 10;
  int k = 15;
  std::string out;
};

struct ReportCommand {
  std::vector<std::string> inputs;
  std::string out;
  bool plots = false;
};

void add_fit_options(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--cv", o.cv, "Cross-validation scheme")->check(CLI::IsMember({"bcv", "rwcv"}))->capture_default_str();
  cmd->add_option("--folds", o.folds, "Blocked-CV folds (also used for initial estimates)")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  cmd->add_option("--grid-n1", o.grid_n1, "lambda1 grid size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--grid-n2", o.grid_n2, "lambda2 grid size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--grid-ratio", o.grid_ratio, "lambda1 grid floor relative to its max")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  cmd->add_option("--grid-ratio2", o.grid_ratio2, "lambda2 multiplier floor")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12))
      ->capture_default_str();
  cmd->add_option("--rwcv-window", o.rwcv_window, "Rolling window length (0: half the shortest series)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Adaptive weight exponent (>= 1)")
      ->check(CLI::Range(1.0, 1e6))
      ->capture_default_str();
  cmd->add_option("--lag", o.lag, "VAR lag order p")->check(CLI::Range(1, 100))->capture_default_str();
  cmd->add_option("--ml-alpha", o.ml_alpha, "Significance level of k1-ml-thresh")
      ->check(CLI::Range(1e-12, 1.0))
      ->capture_default_str();
  cmd->add_option("--max-iter", o.max_iter, "Solver iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--tol", o.tol, "Solver relative objective tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--backtracking", o.backtracking, "Backtracking step size instead of the fixed bound");
}

MethodConfig method_config(const FitOptions& o, const std::string& method, int workers) {
  MethodConfig cfg;
  cfg.method = parse_method(method);
  cfg.p = o.lag;
  cfg.cv = parse_cv_scheme(o.cv);
  cfg.folds = o.folds;
  cfg.grid_n1 = o.grid_n1;
  cfg.grid_n2 = o.grid_n2;
  cfg.grid_ratio = o.grid_ratio;
  cfg.grid_ratio2 = o.grid_ratio2;
  cfg.rwcv_window = o.rwcv_window;
  cfg.alpha = o.alpha;
  cfg.ml_alpha_level = o.ml_alpha;
  cfg.workers = workers;
  cfg.solver.max_iter = o.max_iter;
  cfg.solver.tol = o.tol;
  cfg.solver.step_rule = o.backtracking ? StepRule::backtracking : StepRule::fixed;
  cfg.initial.folds = o.folds;
  cfg.initial.solver = cfg.solver;
  return cfg;
}

std::vector<std::string> predictor_names(const std::vector<std::string>& variables, int p) {
  std::vector<std::string> out;
  for (int l = 1; l <= p; ++l) {
    for (const auto& v : variables) out.push_back(p == 1 ? v : v + ".lag" + std::to_string(l));
  }
  return out;
}

void write_coefficients(const fs::path& path, const Matrix& m, const std::vector<std::string>& variables, int p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "target";
  for (const auto& name : predictor_names(variables, p)) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << variables[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json diagnostics_json(const SolverDiagnostics& d) {
  return {{"iterations", d.iterations},
          {"converged", d.converged},
          {"objective", d.objective},
          {"step", d.step},
          {"restarts", d.restarts},
          {"cancellation", d.cancellation}};
}

json metrics_json(const MetricsReport& r) {
  return {{"mcc", r.mean_mcc},
          {"sensitivity", r.mean_sensitivity},
          {"specificity", r.mean_specificity},
          {"bias", r.mean_bias},
          {"rmse", r.mean_rmse},
          {"zero_tol", r.zero_tol}};
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const bool by_condition = !o.condition.empty();
  const bool by_proportions = !o.pi_p.empty() || !o.pi_i.empty();
  const bool by_common_unique = o.common.has_value() || o.unique.has_value();
  if (by_condition + by_proportions + by_common_unique != 1) {
    throw ValidationError("give exactly one of --condition, --pi-p/--pi-i, or --common/--unique");
  }
  if (o.t_len < 3) throw ValidationError("--t must be >= 3");

  json generator;
  GeneratedDataset ds;
  if (by_common_unique) {
    CommonUniqueSpec spec;
    spec.k = o.k;
    spec.d = o.d;
    spec.prop_fill_com = o.common.value_or(0.0);
    spec.prop_fill_ind = o.unique.value_or(0.0);
    spec.value_lb = o.lb;
    spec.value_ub = o.ub;
    spec.stability_target = o.target;
    spec.random_sign = o.random_sign;
    ds = generate_common_unique(spec, o.t_len, o.seed, o.burn_in);
    generator = {{"design", "common-unique"}, {"common", spec.prop_fill_com}, {"unique", spec.prop_fill_ind}};
  } else {
    HeterogeneitySpec spec;
    if (by_condition) {
      spec = condition_spec(parse_condition(o.condition), o.d, o.k);
      generator = {{"design", "condition"}, {"condition", to_string(parse_condition(o.condition))}};
    } else {
      spec.pi_p = o.pi_p;
      spec.pi_i = o.pi_i;
      spec.d = o.d;
      spec.k = o.k;
      generator = {{"design", "proportions"}};
    }
    spec.value_lb = o.lb;
    spec.value_ub = o.ub;
    spec.stability_target = o.target;
    spec.random_sign = o.random_sign;
    ds = generate_dataset(spec, o.t_len, o.seed, o.burn_in);
    generator["pi_p"] = spec.pi_p;
    generator["pi_i"] = spec.pi_i;
  }
  generator["seed"] = o.seed;
  generator["burn_in"] = o.burn_in;
  generator["value_lb"] = o.lb;
  generator["value_ub"] = o.ub;
  generator["stability_target"] = o.target;
  generator["random_sign"] = o.random_sign;

  const fs::path dir(o.out);
  write_bundle(dir, ds.series, default_variable_names(ds.series.dim()), {{"centered", false}, {"generator", generator}});
  write_truth(dir, truth_json(ds));
  out << "wrote " << ds.series.num_subjects() << " subjects (d=" << ds.series.dim() << ", T=" << o.t_len << ") to "
      << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- fit

int cmd_fit(const FitCommand& c, const FitOptions& fo, int workers, const std::string& effective_config,
            std::ostream& out) {
  auto bundle = read_bundle(c.data);
  MethodConfig cfg = method_config(fo, c.method, workers);
  const bool k1 = !is_multivar(cfg.method);
  if (c.lambda1 || c.lambda2 || !c.subject_lambda.empty()) {
    FixedPenalty fixed;
    if (k1) {
      if (c.lambda1) throw ValidationError("--lambda1 does not apply to K = 1 methods");
      if (!c.lambda2 && c.subject_lambda.empty()) {
        throw ValidationError("K = 1 refits need --lambda2 (fraction) or --subject-lambda");
      }
    } else if (!c.lambda1 || !c.lambda2) {
      throw ValidationError("a refit needs both --lambda1 and --lambda2");
    }
    if (c.lambda1 && *c.lambda1 < 0.0) throw ValidationError("--lambda1 must be >= 0");
    if (c.lambda2 && *c.lambda2 < 0.0) throw ValidationError("--lambda2 must be >= 0");
    fixed.lambda1 = c.lambda1.value_or(0.0);
    fixed.lambda2_fraction = c.lambda2.value_or(1.0);
    fixed.subject_lambda = c.subject_lambda;
    cfg.fixed = fixed;
  }

  std::vector<Vector> means;
  auto data = centered(bundle.series, &means);
  std::vector<Vector> scales;
  if (c.standardize) {
    std::vector<SubjectSeries> subjects = data.subjects();
    for (auto& s : subjects) {
      Vector sd = (s.data.array().square().rowwise().sum() / std::max<Eigen::Index>(s.length() - 1, 1)).sqrt();
      for (Eigen::Index i = 0; i < sd.size(); ++i) {
        if (!(sd(i) > 0.0)) throw ValidationError("subject " + s.subject_id + ": variable with zero variance");
      }
      s.data = s.data.array().colwise() / sd.array();
      scales.push_back(std::move(sd));
    }
    data = MultiSubjectSeries(std::move(subjects));
  }

  const auto start = std::chrono::steady_clock::now();
  const auto result = fit_method(data, cfg);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir(c.out);
  fs::create_directories(dir);
  const int p = cfg.p;
  if (result.decomposition) {
    write_coefficients(dir / "common.csv", result.decomposition->common, bundle.variables, p);
    for (std::size_t k = 0; k < result.decomposition->unique.size(); ++k) {
      write_coefficients(dir / ("unique_" + data[k].subject_id + ".csv"), result.decomposition->unique[k],
                         bundle.variables, p);
    }
  }
  for (std::size_t k = 0; k < result.totals.size(); ++k) {
    write_coefficients(dir / ("total_" + data[k].subject_id + ".csv"), result.totals[k], bundle.variables, p);
  }
  if (result.cv_table) {
    std::ofstream cv_out(dir / "cv_table.csv");
    if (!cv_out) throw std::runtime_error("cannot write " + (dir / "cv_table.csv").string());
    write_cv_table_csv(cv_out, *result.cv_table);
  }
  if (c.heatmaps) {
    const fs::path figs = dir / "heatmaps";
    fs::create_directories(figs);
    const auto cols = predictor_names(bundle.variables, p);
    if (result.decomposition) {
      write_text(figs / "common.svg", heatmap_svg(result.decomposition->common, "common effects", bundle.variables, cols));
    }
    for (std::size_t k = 0; k < result.totals.size(); ++k) {
      write_text(figs / ("total_" + data[k].subject_id + ".svg"),
                 heatmap_svg(result.totals[k], data[k].subject_id + " total effects", bundle.variables, cols));
    }
  }

  json subjects = json::array();
  for (std::size_t k = 0; k < static_cast<std::size_t>(data.num_subjects()); ++k) {
    json s = {{"id", data[k].subject_id}, {"T", data[k].length()}, {"mean", std::vector<double>(means[k].data(), means[k].data() + means[k].size())}};
    if (!scales.empty()) s["scale"] = std::vector<double>(scales[k].data(), scales[k].data() + scales[k].size());
    if (k < result.lambda2.size()) s["lambda2"] = result.lambda2[k];
    if (k < result.subject_lambda.size()) s["lambda"] = result.subject_lambda[k];
    subjects.push_back(std::move(s));
  }
  json summary = {{"method", to_string(cfg.method)},
                  {"cv", result.cv_table ? json(to_string(cfg.cv)) : json(nullptr)},
                  {"refit", cfg.fixed.has_value()},
                  {"lag", p},
                  {"standardized", c.standardize},
                  {"zero_tol", result.zero_tol},
                  {"subjects", subjects},
                  {"seconds", seconds},
                  {"effective_config", effective_config}};
  if (!k1) {
    summary["lambda1"] = result.lambda1;
    summary["lambda2_fraction"] = result.lambda2_fraction;
    summary["diagnostics"] = diagnostics_json(result.diagnostics);
  }
  if (result.cv_table) {
    summary["cv_selected_cell"] = result.cv_table->selected;
    summary["cv_msfe"] = result.cv_table->best().msfe;
  }
  if (bundle.truth && !c.standardize) {
    const auto truths = truth_matrices(*bundle.truth);
    if (truths.size() == result.totals.size() && truths.front().cols() == result.totals.front().cols()) {
      summary["metrics"] = metrics_json(evaluate(truths, result.totals, result.zero_tol));
    }
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  out << to_string(cfg.method) << ": " << result.totals.size() << " subject matrices written to " << dir.string();
  if (!k1) out << " (lambda1=" << format_double(result.lambda1) << ", lambda2=" << format_double(result.lambda2_fraction) << ")";
  out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- benchmark

int cmd_benchmark(const BenchmarkCommand& c, const FitOptions& fo, int workers, const std::string& effective_config,
                  std::ostream& out, std::ostream& err) {
  BenchmarkPlan plan;
  for (const auto& name : c.conditions) plan.conditions.push_back(parse_condition(name));
  plan.t_lens = c.t_lens;
  if (c.methods.empty()) {
    plan.methods = all_methods();
  } else {
    for (const auto& m : c.methods) plan.methods.push_back(parse_method(m));
  }
  plan.reps = c.reps;
  plan.seed = c.seed;
  plan.d = c.d;
  plan.k = c.k;
  plan.base = method_config(fo, to_string(plan.methods.front()), 1);
  plan.workers = workers;
  plan.validate();

  const auto start = std::chrono::steady_clock::now();
  const auto result = run_benchmark(plan);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& f : result.failures) {
    err << "replication failed: " << f.key.condition << " T=" << f.key.t_len << " " << f.key.method << " rep "
        << f.key.replication << ": " << f.message << '\n';
  }

  const fs::path dir(c.out);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "metrics.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
    write_long_csv(csv, result.rows);
  }
  const auto means = summarize(result.rows);
  {
    std::ofstream csv(dir / "summary.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "summary.csv").string());
    write_means_csv(csv, means);
  }
  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"condition", f.key.condition},
                        {"T", f.key.t_len},
                        {"method", f.key.method},
                        {"replication", f.key.replication},
                        {"error", f.message}});
  }
  double fit_seconds = 0.0;
  for (const auto& r : result.rows) fit_seconds += r.seconds;
  const json summary = {{"rows", result.rows.size()},
                        {"failed", result.failures.size()},
                        {"failures", failures},
                        {"workers", workers},
                        {"seconds", seconds},
                        {"fit_seconds", fit_seconds},
                        {"effective_config", effective_config}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  write_means_csv(out, means);
  if (!result.failures.empty()) err << result.failures.size() << " replication(s) excluded\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const ReportCommand& c, std::ostream& out) {
  std::vector<fs::path> inputs(c.inputs.begin(), c.inputs.end());
  const auto rows = aggregate_metrics(inputs);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "report.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "report.csv").string());
    write_report_csv(csv, rows);
  }
  if (c.plots) write_report_plots(dir / "plots", rows);
  out << rows.size() << " summary rows written to " << (dir / "report.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-subject sparse VAR estimation, simulation and benchmarking", "multivar"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (TOML/INI); command-line flags take precedence");

  int workers = default_workers();
  app.add_option("--workers", workers, "Worker threads")
      ->envname(kWorkersEnv)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a multi-subject VAR dataset bundle");
  simulate->add_option("--condition", sim.condition, "Heterogeneity preset: no | low | high")
      ->check(CLI::IsMember({"no", "none", "low", "high"}));
  simulate->add_option("--pi-p", sim.pi_p, "Path proportions per group")->delimiter(',');
  simulate->add_option("--pi-i", sim.pi_i, "Subject proportions per group")->delimiter(',');
  simulate->add_option("--common", sim.common, "Proportion of paths common to all subjects");
  simulate->add_option("--unique", sim.unique, "Proportion of paths unique to each subject");
  simulate->add_option("--t", sim.t_len, "Time points per subject")->required();
  simulate->add_option("--d", sim.d, "Variables")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--k", sim.k, "Subjects")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--burn-in", sim.burn_in, "Discarded warm-up points")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  simulate->add_option("--lb", sim.lb, "Lower bound of |coefficient|")->capture_default_str();
  simulate->add_option("--ub", sim.ub, "Upper bound of |coefficient|")->capture_default_str();
  simulate->add_option("--target", sim.target, "Spectral radius target for rescaling")->capture_default_str();
  simulate->add_flag("--random-sign", sim.random_sign, "Random coefficient signs");
  simulate->add_option("--out", sim.out, "Output bundle directory")->required();

  FitCommand fit;
  FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a bundle and write coefficient matrices");
  fit_cmd->add_option("--data", fit.data, "Bundle directory")->required();
  fit_cmd->add_option("--method", fit.method, "Estimator")->capture_default_str();
  add_fit_options(fit_cmd, fit_opts);
  fit_cmd->add_option("--lambda1", fit.lambda1, "Refit at this lambda1 instead of cross-validating");
  fit_cmd->add_option("--lambda2", fit.lambda2, "Refit at this lambda2 multiplier");
  fit_cmd->add_option("--subject-lambda", fit.subject_lambda, "K = 1 refit: absolute level per subject")
      ->delimiter(',');
  fit_cmd->add_flag("--standardize", fit.standardize, "Scale variables to unit variance after centering");
  fit_cmd->add_flag("--heatmaps", fit.heatmaps, "Write SVG heatmaps of the fitted matrices");
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();

  BenchmarkCommand bench;
  FitOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo simulate -> fit -> metrics");
  bench_cmd->add_option("--conditions", bench.conditions, "Heterogeneity conditions")
      ->delimiter(',')
      ->expected(1, -1)
      ->check(CLI::IsMember({"no", "none", "low", "high"}))
      ->capture_default_str();
  bench_cmd->add_option("--t", bench.t_lens, "Series lengths")->delimiter(',')->expected(1, -1)->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "Estimators (default: all)")->delimiter(',')->expected(1, -1);
  bench_cmd->add_option("--reps", bench.reps, "Replications per cell")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Master seed")->capture_default_str();
  bench_cmd->add_option("--d", bench.d, "Variables")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--k", bench.k, "Subjects")->check(CLI::PositiveNumber)->capture_default_str();
  add_fit_options(bench_cmd, bench_opts);
  bench_cmd->add_option("--out", bench.out, "Output directory")->required();

  ReportCommand rep;
  auto* report_cmd = app.add_subcommand("report", "Aggregate benchmark metrics into tables and figures");
  report_cmd->add_option("--in", rep.inputs, "Metrics CSV files")->required()->expected(1, -1);
  report_cmd->add_flag("--plots", rep.plots, "Write SVG bar charts");
  report_cmd->add_option("--out", rep.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    const std::string effective = app.config_to_str(true, false);
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (fit_cmd->parsed()) return cmd_fit(fit, fit_opts, workers, effective, out);
    if (bench_cmd->parsed()) return cmd_benchmark(bench, bench_opts, workers, effective, out, err);
    if (report_cmd->parsed()) return cmd_report(rep, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace multivar::cli
