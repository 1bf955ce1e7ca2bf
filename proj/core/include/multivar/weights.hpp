#pragma once

#include "multivar/var_core.hpp"

#include <span>
#include <string>
#include <vector>

namespace multivar {

enum class InitialMethod { maximum_likelihood, ridge, lasso };

std::string to_string(InitialMethod m);

/// Per-subject initial transition estimates, each d x (dp).
struct InitialEstimates {
  std::vector<Matrix> phis;
  InitialMethod method = InitialMethod::maximum_likelihood;
  std::vector<double> tuning;  // selected ridge/lasso penalty per subject (empty for ML)
};

inline constexpr double kDefaultWeightFloor = 1e-8;
inline constexpr double kDefaultWeightCap = 1e8;

/// Entrywise penalty multipliers for the common block and each unique block.
struct AdaptiveWeights {
  Matrix common_weights;
  std::vector<Matrix> unique_weights;
  double alpha = 1.0;
  double cap = kDefaultWeightCap;
};

/// Lower weighted median: the smallest value whose cumulative weight (in
/// sorted order) reaches half the total. Equal weights give the ordinary
/// median for odd counts and the lower middle value for even counts.
double weighted_median(std::span<const double> values, std::span<const double> weights);

Matrix entrywise_weighted_median(const std::vector<Matrix>& phis, std::span<const double> subject_weights);

/// Effective sample sizes T_k - p used as median weights.
std::vector<double> sample_size_weights(const MultiSubjectSeries& data, int p);

/// 1 / max(|x|, floor_eps)^alpha, clipped at cap.
double adaptive_weight(double magnitude, double alpha, double floor_eps, double cap);

AdaptiveWeights build_adaptive_weights(const InitialEstimates& initials, std::span<const double> subject_weights,
                                       double alpha = 1.0, double floor_eps = kDefaultWeightFloor,
                                       double cap = kDefaultWeightCap);

/// Single-subject adaptive-lasso weights 1 / |phi|^alpha (used by K = 1 methods).
Matrix single_subject_weights(const Matrix& initial, double alpha = 1.0, double floor_eps = kDefaultWeightFloor,
                              double cap = kDefaultWeightCap);

}  // namespace multivar
