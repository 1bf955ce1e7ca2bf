#include "multivar/weights.hpp"

#include "multivar/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace multivar {

std::string to_string(InitialMethod m) {
  switch (m) {
    case InitialMethod::maximum_likelihood: return "ml";
    case InitialMethod::ridge: return "ridge";
    case InitialMethod::lasso: return "lasso";
  }
  return "?";
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw DimensionError("weighted_median needs one weight per value");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DimensionError("weighted_median weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw DimensionError("weighted_median weights are all zero");

  // lower weighted median: first value whose cumulative weight reaches half
  const double half = 0.5 * total;
  double cumulative = 0.0;
  for (std::size_t idx : order) {
    cumulative += weights[idx];
    if (cumulative >= half && weights[idx] > 0.0) return values[idx];
  }
  return values[order.back()];
}

Matrix entrywise_weighted_median(const std::vector<Matrix>& phis, std::span<const double> subject_weights) {
  if (phis.empty() || phis.size() != subject_weights.size()) {
    throw DimensionError("entrywise_weighted_median needs one weight per subject");
  }
  const auto rows = phis.front().rows();
  const auto cols = phis.front().cols();
  for (const auto& m : phis) {
    if (m.rows() != rows || m.cols() != cols) throw DimensionError("initial estimates differ in shape");
  }
  Matrix med(rows, cols);
  std::vector<double> column(phis.size());
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (std::size_t k = 0; k < phis.size(); ++k) column[k] = phis[k](i, j);
      med(i, j) = weighted_median(column, subject_weights);
    }
  }
  return med;
}

std::vector<double> sample_size_weights(const MultiSubjectSeries& data, int p) {
  std::vector<double> w;
  for (const auto& s : data.subjects()) w.push_back(static_cast<double>(s.length() - p));
  return w;
}

double adaptive_weight(double magnitude, double alpha, double floor_eps, double cap) {
  const double w = 1.0 / std::pow(std::max(std::abs(magnitude), floor_eps), alpha);
  return std::min(w, cap);
}

AdaptiveWeights build_adaptive_weights(const InitialEstimates& initials, std::span<const double> subject_weights,
                                       double alpha, double floor_eps, double cap) {
  if (alpha < 1.0) throw SpecError("adaptive weight exponent alpha must be >= 1");
  const Matrix median = entrywise_weighted_median(initials.phis, subject_weights);
  AdaptiveWeights out;
  out.alpha = alpha;
  out.cap = cap;
  out.common_weights = median.unaryExpr([&](double v) { return adaptive_weight(v, alpha, floor_eps, cap); });
  for (const auto& phi : initials.phis) {
    out.unique_weights.push_back(
        (phi - median).unaryExpr([&](double v) { return adaptive_weight(v, alpha, floor_eps, cap); }));
  }
  return out;
}

Matrix single_subject_weights(const Matrix& initial, double alpha, double floor_eps, double cap) {
  return initial.unaryExpr([&](double v) { return adaptive_weight(v, alpha, floor_eps, cap); });
}

}  // namespace multivar
