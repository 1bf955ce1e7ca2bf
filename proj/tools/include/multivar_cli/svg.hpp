#pragma once

#include "multivar/var_core.hpp"

#include <string>
#include <vector>

namespace multivar::cli {

/// Matrix heatmap with a blue-white-red scale symmetric about zero.
std::string heatmap_svg(const Matrix& m, const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels);

/// One panel of grouped bars: groups along x, one bar per series in each group.
struct BarPanel {
  std::string title;
  std::vector<std::string> groups;
  std::vector<std::string> series;
  std::vector<std::vector<double>> values;  // [series][group]; NaN leaves a gap
};

/// Panels laid out side by side with a shared y range and legend.
std::string grouped_bars_svg(const std::string& title, const std::string& y_label, const std::vector<BarPanel>& panels);

}  // namespace multivar::cli
