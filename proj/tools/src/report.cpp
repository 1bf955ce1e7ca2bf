#include "multivar_cli/report.hpp"

#include "multivar/csv.hpp"
#include "multivar/error.hpp"
#include "multivar/metrics.hpp"
#include "multivar_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

namespace multivar::cli {

namespace fs = std::filesystem;

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<ReportRow> aggregate_metrics(const std::vector<fs::path>& inputs) {
  if (inputs.empty()) throw ValidationError("report needs at least one metrics CSV");
  const auto expected = split_csv_line(kMetricsCsvHeader);

  struct Cell {
    std::string condition;
    int t_len;
    std::string method;
    std::vector<std::vector<double>> values;  // per metric
  };
  std::vector<Cell> cells;
  for (const auto& path : inputs) {
    const auto table = read_csv(path);
    if (table.header != expected) {
      throw ValidationError(path.string() + ":1: expected header '" + std::string(kMetricsCsvHeader) + "'");
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const std::string ctx = path.string() + ":" + std::to_string(r + 2);
      const int t_len = static_cast<int>(parse_double(row[1], ctx + " column 'T'"));
      auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
        return c.condition == row[0] && c.t_len == t_len && c.method == row[2];
      });
      if (it == cells.end()) {
        cells.push_back(Cell{row[0], t_len, row[2], std::vector<std::vector<double>>(std::size(kReportMetrics))});
        it = cells.end() - 1;
      }
      for (std::size_t m = 0; m < std::size(kReportMetrics); ++m) {
        it->values[m].push_back(parse_double(row[4 + m], ctx + " column '" + kReportMetrics[m] + "'"));
      }
    }
  }

  std::vector<ReportRow> out;
  for (const auto& c : cells) {
    for (std::size_t m = 0; m < std::size(kReportMetrics); ++m) {
      const auto& v = c.values[m];
      ReportRow r{c.condition, c.t_len, c.method, kReportMetrics[m], static_cast<int>(v.size())};
      double sum = 0.0;
      for (double x : v) sum += x;
      r.mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - r.mean) * (x - r.mean);
      r.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      r.q05 = quantile(v, 0.05);
      r.q25 = quantile(v, 0.25);
      r.median = quantile(v, 0.5);
      r.q75 = quantile(v, 0.75);
      r.q95 = quantile(v, 0.95);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "condition,T,method,metric,n,mean,sd,q05,q25,median,q75,q95\n";
  for (const auto& r : rows) {
    os << r.condition << ',' << r.t_len << ',' << r.method << ',' << r.metric << ',' << r.n << ','
       << format_double(r.mean) << ',' << format_double(r.sd) << ',' << format_double(r.q05) << ','
       << format_double(r.q25) << ',' << format_double(r.median) << ',' << format_double(r.q75) << ','
       << format_double(r.q95) << '\n';
  }
}

void write_report_plots(const fs::path& dir, const std::vector<ReportRow>& rows) {
  fs::create_directories(dir);
  for (const char* metric : kReportMetrics) {
    std::vector<std::string> conditions;
    std::vector<int> t_lens;
    std::vector<std::string> methods;
    for (const auto& r : rows) {
      if (r.metric != metric) continue;
      if (std::find(conditions.begin(), conditions.end(), r.condition) == conditions.end()) {
        conditions.push_back(r.condition);
      }
      if (std::find(t_lens.begin(), t_lens.end(), r.t_len) == t_lens.end()) t_lens.push_back(r.t_len);
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    }
    std::sort(t_lens.begin(), t_lens.end());
    std::vector<BarPanel> panels;
    for (const auto& c : conditions) {
      BarPanel p;
      p.title = c;
      for (int t : t_lens) p.groups.push_back("T=" + std::to_string(t));
      p.series = methods;
      p.values.assign(methods.size(), std::vector<double>(t_lens.size(), std::nan("")));
      for (const auto& r : rows) {
        if (r.metric != metric || r.condition != c) continue;
        const auto s = std::find(methods.begin(), methods.end(), r.method) - methods.begin();
        const auto g = std::find(t_lens.begin(), t_lens.end(), r.t_len) - t_lens.begin();
        p.values[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)] = r.mean;
      }
      panels.push_back(std::move(p));
    }
    std::ofstream out(dir / (std::string(metric) + ".svg"));
    if (!out) throw std::runtime_error("cannot write " + (dir / (std::string(metric) + ".svg")).string());
    out << grouped_bars_svg(std::string("mean ") + metric, metric, panels);
  }
}

}  // namespace multivar::cli
