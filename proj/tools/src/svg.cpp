#include "multivar_cli/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace multivar::cli {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string rgb(double r, double g, double b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r * 255)),
                static_cast<int>(std::lround(g * 255)), static_cast<int>(std::lround(b * 255)));
  return buf;
}

// -1 -> blue, 0 -> white, +1 -> red
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  if (t >= 0) return rgb(1.0, 1.0 - 0.8 * t, 1.0 - 0.8 * t);
  return rgb(1.0 + 0.8 * t, 1.0 + 0.8 * t, 1.0);
}

std::string fmt(double v, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

constexpr std::array<const char*, 8> kPalette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                              "#66a61e", "#e6ab02", "#a6761d", "#666666"};

}  // namespace

std::string heatmap_svg(const Matrix& m, const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels) {
  const int cell = 28;
  const int left = 70;
  const int top = 50;
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-12);
  const int width = left + cols * cell + 110;
  const int height = top + rows * cell + 70;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  for (int i = 0; i < rows; ++i) {
    const std::string label = i < static_cast<int>(row_labels.size()) ? row_labels[i] : std::to_string(i + 1);
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + i * cell + cell / 2 + 4 << "\" text-anchor=\"end\">"
       << escape(label) << "</text>\n";
    for (int j = 0; j < cols; ++j) {
      const double v = m(i, j);
      os << "<rect x=\"" << left + j * cell << "\" y=\"" << top + i * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << diverging(v / scale) << "\" stroke=\"#cccccc\"><title>"
         << escape(label) << " / "
         << escape(j < static_cast<int>(col_labels.size()) ? col_labels[j] : std::to_string(j + 1)) << ": "
         << fmt(v, 4) << "</title></rect>\n";
    }
  }
  for (int j = 0; j < cols; ++j) {
    const std::string label = j < static_cast<int>(col_labels.size()) ? col_labels[j] : std::to_string(j + 1);
    const int x = left + j * cell + cell / 2;
    const int y = top + rows * cell + 8;
    os << "<text x=\"" << x << "\" y=\"" << y << "\" transform=\"rotate(60 " << x << ' ' << y << ")\">"
       << escape(label) << "</text>\n";
  }
  // color bar
  const int bx = left + cols * cell + 30;
  const int steps = 20;
  const int bh = rows * cell;
  for (int s = 0; s < steps; ++s) {
    const double t = 1.0 - 2.0 * (s + 0.5) / steps;
    os << "<rect x=\"" << bx << "\" y=\"" << top + s * bh / steps << "\" width=\"14\" height=\""
       << bh / steps + 1 << "\" fill=\"" << diverging(t) << "\"/>\n";
  }
  os << "<text x=\"" << bx + 18 << "\" y=\"" << top + 8 << "\">" << fmt(scale) << "</text>\n";
  os << "<text x=\"" << bx + 18 << "\" y=\"" << top + bh / 2 + 4 << "\">0</text>\n";
  os << "<text x=\"" << bx + 18 << "\" y=\"" << top + bh << "\">" << fmt(-scale) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string grouped_bars_svg(const std::string& title, const std::string& y_label,
                             const std::vector<BarPanel>& panels) {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t max_series = 0;
  for (const auto& p : panels) {
    max_series = std::max(max_series, p.series.size());
    for (const auto& s : p.values) {
      for (double v : s) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;

  const int panel_w = 260;
  const int panel_h = 220;
  const int left = 60;
  const int top = 50;
  const int gap = 30;
  const int width = left + static_cast<int>(panels.size()) * (panel_w + gap) + 40;
  const int legend_y = top + panel_h + 50;
  const int height = legend_y + 18 * static_cast<int>(max_series) + 20;
  auto y_of = [&](double v) { return top + panel_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  os << "<text x=\"14\" y=\"" << top + panel_h / 2 << "\" transform=\"rotate(-90 14 " << top + panel_h / 2
     << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = lo + (hi - lo) * tick / 4.0;
    os << "<text x=\"" << left - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& p = panels[pi];
    const int x0 = left + static_cast<int>(pi) * (panel_w + gap);
    os << "<rect x=\"" << x0 << "\" y=\"" << top << "\" width=\"" << panel_w << "\" height=\"" << panel_h
       << "\" fill=\"none\" stroke=\"#999999\"/>\n";
    os << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << top - 8 << "\" text-anchor=\"middle\">"
       << escape(p.title) << "</text>\n";
    os << "<line x1=\"" << x0 << "\" x2=\"" << x0 + panel_w << "\" y1=\"" << y_of(0.0) << "\" y2=\"" << y_of(0.0)
       << "\" stroke=\"#333333\"/>\n";
    const double group_w = static_cast<double>(panel_w) / std::max<std::size_t>(p.groups.size(), 1);
    const double bar_w = group_w * 0.8 / std::max<std::size_t>(p.series.size(), 1);
    for (std::size_t g = 0; g < p.groups.size(); ++g) {
      const double gx = x0 + g * group_w + group_w * 0.1;
      for (std::size_t s = 0; s < p.series.size(); ++s) {
        const double v = g < p.values[s].size() ? p.values[s][g] : std::nan("");
        if (!std::isfinite(v)) continue;
        const double y1 = y_of(std::max(v, 0.0));
        const double y2 = y_of(std::min(v, 0.0));
        os << "<rect x=\"" << fmt(gx + s * bar_w) << "\" y=\"" << fmt(y1) << "\" width=\"" << fmt(bar_w)
           << "\" height=\"" << fmt(y2 - y1) << "\" fill=\"" << kPalette[s % kPalette.size()] << "\"><title>"
           << escape(p.series[s]) << ", " << escape(p.groups[g]) << ": " << fmt(v, 4) << "</title></rect>\n";
      }
      os << "<text x=\"" << fmt(x0 + (g + 0.5) * group_w) << "\" y=\"" << top + panel_h + 16
         << "\" text-anchor=\"middle\">" << escape(p.groups[g]) << "</text>\n";
    }
  }
  if (!panels.empty()) {
    const auto& series = panels.front().series;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const int y = legend_y + 18 * static_cast<int>(s);
      os << "<rect x=\"" << left << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
         << kPalette[s % kPalette.size()] << "\"/>\n";
      os << "<text x=\"" << left + 18 << "\" y=\"" << y << "\">" << escape(series[s]) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace multivar::cli
