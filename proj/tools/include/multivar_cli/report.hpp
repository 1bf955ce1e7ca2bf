#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace multivar::cli {

inline constexpr const char* kReportMetrics[] = {"mcc", "sensitivity", "specificity", "bias", "rmse"};

/// Descriptive statistics of one metric over the replications of a cell.
struct ReportRow {
  std::string condition;
  int t_len = 0;
  std::string method;
  std::string metric;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

/// Linear-interpolation quantile (Hyndman-Fan type 7) of unsorted values.
double quantile(std::vector<double> values, double prob);

/// Reads long-format metrics CSVs (benchmark output) and aggregates them per
/// (condition, T, method, metric), in first-appearance order. Throws
/// ValidationError on a header that is not the metrics schema.
std::vector<ReportRow> aggregate_metrics(const std::vector<std::filesystem::path>& inputs);

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

/// One SVG per metric: a panel per condition, T along x, a bar per method.
void write_report_plots(const std::filesystem::path& dir, const std::vector<ReportRow>& rows);

}  // namespace multivar::cli
