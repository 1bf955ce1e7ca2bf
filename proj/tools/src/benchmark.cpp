#include "multivar_cli/benchmark.hpp"

#include "multivar/csv.hpp"
#include "multivar/error.hpp"
#include "multivar/parallel.hpp"
#include "multivar/seeding.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <optional>
#include <ostream>

namespace multivar::cli {

namespace {

struct Task {
  std::size_t condition;
  std::size_t t_index;
  std::size_t method;
  int replication;
};

}  // namespace

void BenchmarkPlan::validate() const {
  if (conditions.empty()) throw ValidationError("benchmark needs at least one condition");
  if (t_lens.empty()) throw ValidationError("benchmark needs at least one series length");
  if (methods.empty()) throw ValidationError("benchmark needs at least one method");
  if (reps < 1) throw ValidationError("replication count must be >= 1");
  if (d < 1 || k < 1) throw ValidationError("d and K must be >= 1");
  for (int t : t_lens) {
    if (t < 3) throw ValidationError("series length " + std::to_string(t) + " is too short");
  }
}

std::uint64_t dataset_seed(std::uint64_t seed, HeterogeneityCondition c, int t_len, int replication) {
  return derive_seed(seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(t_len),
                            static_cast<std::uint64_t>(replication)});
}

BenchmarkResult run_benchmark(const BenchmarkPlan& plan,
                              const std::function<void(std::size_t, std::size_t)>& progress) {
  plan.validate();
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < plan.conditions.size(); ++c) {
    for (std::size_t t = 0; t < plan.t_lens.size(); ++t) {
      for (std::size_t m = 0; m < plan.methods.size(); ++m) {
        for (int r = 1; r <= plan.reps; ++r) tasks.push_back(Task{c, t, m, r});
      }
    }
  }

  std::vector<std::optional<BenchmarkRow>> rows(tasks.size());
  std::vector<std::optional<BenchmarkFailure>> failures(tasks.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(tasks.size(), plan.workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    const auto condition = plan.conditions[task.condition];
    const int t_len = plan.t_lens[task.t_index];
    const Method method = plan.methods[task.method];
    MetricsKey key{to_string(condition), t_len, to_string(method), task.replication};
    try {
      const auto spec = condition_spec(condition, plan.d, plan.k);
      const auto ds = generate_dataset(spec, t_len, dataset_seed(plan.seed, condition, t_len, task.replication),
                                       plan.burn_in);
      MethodConfig cfg = plan.base;
      cfg.method = method;
      cfg.workers = 1;
      const auto start = std::chrono::steady_clock::now();
      const auto fit = fit_method(centered(ds.series), cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows[i] = BenchmarkRow{key, evaluate(ds.true_models, fit.totals, fit.zero_tol), secs};
    } catch (const std::exception& e) {
      failures[i] = BenchmarkFailure{key, e.what()};
    }
    const std::size_t n = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(n, tasks.size());
    }
  });

  // Reorder to condition, T, method, replication regardless of scheduling.
  BenchmarkResult out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (rows[i]) out.rows.push_back(std::move(*rows[i]));
    if (failures[i]) out.failures.push_back(std::move(*failures[i]));
  }
  return out;
}

std::vector<MeanRow> summarize(const std::vector<BenchmarkRow>& rows) {
  std::vector<MeanRow> out;
  for (const auto& row : rows) {
    MeanRow* cell = nullptr;
    for (auto& m : out) {
      if (m.condition == row.key.condition && m.t_len == row.key.t_len && m.method == row.key.method) cell = &m;
    }
    if (!cell) {
      out.push_back(MeanRow{row.key.condition, row.key.t_len, row.key.method});
      cell = &out.back();
    }
    ++cell->n;
    cell->mcc += row.report.mean_mcc;
    cell->sensitivity += row.report.mean_sensitivity;
    cell->specificity += row.report.mean_specificity;
    cell->bias += row.report.mean_bias;
    cell->rmse += row.report.mean_rmse;
  }
  for (auto& m : out) {
    const double n = static_cast<double>(m.n);
    m.mcc /= n;
    m.sensitivity /= n;
    m.specificity /= n;
    m.bias /= n;
    m.rmse /= n;
  }
  return out;
}

const MeanRow* find_mean(const std::vector<MeanRow>& rows, const std::string& condition, int t_len,
                         const std::string& method) {
  for (const auto& m : rows) {
    if (m.condition == condition && m.t_len == t_len && m.method == method) return &m;
  }
  return nullptr;
}

void write_long_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) write_metrics_row(os, r.key, r.report);
}

void write_means_csv(std::ostream& os, const std::vector<MeanRow>& rows) {
  os << "condition,T,method,n,mcc,sensitivity,specificity,bias,rmse\n";
  for (const auto& m : rows) {
    os << m.condition << ',' << m.t_len << ',' << m.method << ',' << m.n << ',' << format_double(m.mcc) << ','
       << format_double(m.sensitivity) << ',' << format_double(m.specificity) << ',' << format_double(m.bias) << ','
       << format_double(m.rmse) << '\n';
  }
}

}  // namespace multivar::cli
