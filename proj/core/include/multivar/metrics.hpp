#pragma once

#include "multivar/var_core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace multivar {

struct ConfusionCounts {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const noexcept { return tp + tn + fp + fn; }
};

inline constexpr double kPenalizedZeroTol = 1e-12;

/// An entry counts as nonzero iff |value| > zero_tol, in both matrices.
ConfusionCounts confusion(const Matrix& truth, const Matrix& estimate, double zero_tol = kPenalizedZeroTol);
ConfusionCounts confusion(const VarModel& truth, const Matrix& estimate, double zero_tol = kPenalizedZeroTol);

/// Matthews correlation; 0 when any denominator factor vanishes.
double mcc(const ConfusionCounts& c);
double sensitivity(const ConfusionCounts& c);
double specificity(const ConfusionCounts& c);

struct BiasRmse {
  double bias = 0.0;
  double rmse = 0.0;
};

/// Mean absolute error and root mean square error over the entries of one matrix pair.
BiasRmse bias_rmse(const Matrix& truth, const Matrix& estimate);
/// Subject means of the per-subject values.
BiasRmse bias_rmse(const std::vector<Matrix>& truths, const std::vector<Matrix>& estimates);

struct SubjectMetrics {
  ConfusionCounts counts;
  double mcc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
};

struct MetricsReport {
  std::vector<SubjectMetrics> subjects;
  double mean_mcc = 0.0;
  double mean_sensitivity = 0.0;
  double mean_specificity = 0.0;
  double mean_bias = 0.0;
  double mean_rmse = 0.0;
  double zero_tol = kPenalizedZeroTol;
};

MetricsReport evaluate(const std::vector<Matrix>& truths, const std::vector<Matrix>& estimates,
                       double zero_tol = kPenalizedZeroTol);
MetricsReport evaluate(const std::vector<VarModel>& truths, const std::vector<Matrix>& estimates,
                       double zero_tol = kPenalizedZeroTol);

/// Key columns identifying a benchmark cell.
struct MetricsKey {
  std::string condition;
  int t_len = 0;
  std::string method;
  int replication = 0;
};

inline constexpr const char* kMetricsCsvHeader = "condition,T,method,replication,mcc,sensitivity,specificity,bias,rmse";

void write_metrics_row(std::ostream& os, const MetricsKey& key, const MetricsReport& report);
std::string metrics_json_row(const MetricsKey& key, const MetricsReport& report);

}  // namespace multivar
