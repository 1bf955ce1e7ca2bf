#pragma once

#include "multivar/metrics.hpp"
#include "multivar/pipeline.hpp"
#include "multivar/simulator.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace multivar::cli {

/// Monte Carlo design: every (condition, T, replication) dataset is fitted by
/// every method, so methods are compared on identical data.
struct BenchmarkPlan {
  std::vector<HeterogeneityCondition> conditions;
  std::vector<int> t_lens;
  std::vector<Method> methods;
  int reps = 20;
  std::uint64_t seed = 1;
  int d = 10;
  int k = 15;
  int burn_in = kDefaultBurnIn;
  MethodConfig base;  // method field is overridden per task
  int workers = 1;

  void validate() const;
};

struct BenchmarkRow {
  MetricsKey key;
  MetricsReport report;
  double seconds = 0.0;
};

struct BenchmarkFailure {
  MetricsKey key;
  std::string message;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;  // condition, T, method, replication order of the plan
  std::vector<BenchmarkFailure> failures;
};

/// Seed of the simulated dataset for one (condition, T, replication) cell.
std::uint64_t dataset_seed(std::uint64_t seed, HeterogeneityCondition c, int t_len, int replication);

/// Runs the plan on `plan.workers` threads. Failed fits are collected, not
/// thrown; `progress` (optional) is called after every finished task.
BenchmarkResult run_benchmark(const BenchmarkPlan& plan,
                              const std::function<void(std::size_t done, std::size_t total)>& progress = {});

/// Mean metric values of one (condition, T, method) cell.
struct MeanRow {
  std::string condition;
  int t_len = 0;
  std::string method;
  int n = 0;
  double mcc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
};

std::vector<MeanRow> summarize(const std::vector<BenchmarkRow>& rows);
const MeanRow* find_mean(const std::vector<MeanRow>& rows, const std::string& condition, int t_len,
                         const std::string& method);

void write_long_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows);
void write_means_csv(std::ostream& os, const std::vector<MeanRow>& rows);

}  // namespace multivar::cli
