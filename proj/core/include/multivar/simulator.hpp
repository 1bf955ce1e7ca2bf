#pragma once

#include "multivar/var_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace multivar {

using SupportMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Heterogeneity design for VAR(1) data: for each group g, a fraction
/// pi_p[g] of the d*d paths is switched on in a fraction pi_i[g] of subjects.
struct HeterogeneitySpec {
  std::vector<double> pi_p;
  std::vector<double> pi_i;
  int d = 10;
  int k = 15;
  double value_lb = 0.1;
  double value_ub = 0.9;
  double stability_target = 0.95;
  bool random_sign = false;

  /// Throws SpecError naming the first violated invariant.
  void validate() const;
  /// Paths per group (pi_p[g] * d^2).
  std::vector<int> group_path_counts() const;
  /// Subjects per group (pi_i[g] * k).
  std::vector<int> group_subject_counts() const;
};

enum class HeterogeneityCondition { none, low, high };

HeterogeneityCondition parse_condition(const std::string& name);
std::string to_string(HeterogeneityCondition c);

/// The three preset designs, with the given d and k (defaults 10 / 15).
HeterogeneitySpec condition_spec(HeterogeneityCondition c, int d = 10, int k = 15);

struct SupportAssignment {
  std::vector<SupportMask> subject_masks;
  std::vector<std::vector<int>> group_paths;     // column-major linear indices into d x d
  std::vector<std::vector<int>> group_subjects;  // subject indices, sorted
};

SupportAssignment assign_supports(const HeterogeneitySpec& spec, std::uint64_t seed);

/// Draws |coef| ~ U(lb, ub) independently per subject and masked entry, then
/// rescales each model into the stability target. Noise covariance is I.
std::vector<VarModel> draw_coefficients(const std::vector<SupportMask>& masks, double value_lb,
                                        double value_ub, double stability_target, bool random_sign,
                                        std::uint64_t seed);
std::vector<VarModel> draw_coefficients(const std::vector<SupportMask>& masks,
                                        const HeterogeneitySpec& spec, std::uint64_t seed);

/// Shrinks a model whose companion radius exceeds `target`; lag l is scaled
/// by (target / rho)^l. Returned unchanged when already inside.
VarModel rescale_to_stability(const VarModel& model, double target);

struct GeneratedDataset {
  MultiSubjectSeries series;
  std::vector<VarModel> true_models;
  SupportMask true_common_support;
  std::vector<SupportMask> true_supports;
};

GeneratedDataset generate_dataset(const HeterogeneitySpec& spec, int t_len, std::uint64_t seed,
                                  int burn_in = kDefaultBurnIn);

struct CommonUniqueSpec {
  int k = 3;
  int d = 10;
  double prop_fill_com = 0.0;
  double prop_fill_ind = 0.1;
  double value_lb = 0.1;
  double value_ub = 0.9;
  double stability_target = 0.95;
  bool random_sign = false;
};

/// Shared paths common to every subject plus disjoint per-subject unique paths.
GeneratedDataset generate_common_unique(const CommonUniqueSpec& spec, int t_len, std::uint64_t seed,
                                        int burn_in = kDefaultBurnIn);

SupportMask support_of(const Matrix& m, double zero_tol = 0.0);

}  // namespace multivar
