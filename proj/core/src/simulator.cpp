#include "multivar/simulator.hpp"

#include "multivar/error.hpp"
#include "multivar/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace multivar {

namespace {

constexpr double kIntegralTol = 1e-6;

int integral_count(double proportion, int total, const char* what, std::size_t g) {
  const double raw = proportion * total;
  const double rounded = std::round(raw);
  if (std::abs(raw - rounded) > kIntegralTol) {
    std::ostringstream msg;
    msg << what << "[" << g << "] = " << proportion << " times " << total << " = " << raw
        << " is not an integer";
    throw SpecError(msg.str());
  }
  return static_cast<int>(rounded);
}

// Partial Fisher-Yates: the first n entries of `pool` after the call are a
// uniform sample without replacement.
std::vector<int> sample_without_replacement(std::vector<int> pool, int n, Rng& rng) {
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(n));
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<int> iota_vector(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

SupportMask common_of(const std::vector<SupportMask>& masks) {
  SupportMask common = masks.front();
  for (const auto& m : masks) common = common && m;
  return common;
}

GeneratedDataset simulate_from(std::vector<VarModel> models, std::vector<SupportMask> masks,
                               int t_len, std::uint64_t seed, int burn_in) {
  std::vector<SubjectSeries> series;
  series.reserve(models.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    auto s = simulate_var(models[k], t_len, burn_in, derive_seed(seed, {3, k}));
    std::ostringstream id;
    id << "subject_" << (k + 1);
    s.subject_id = id.str();
    series.push_back(std::move(s));
  }
  SupportMask common = common_of(masks);
  return GeneratedDataset{MultiSubjectSeries(std::move(series)), std::move(models),
                          std::move(common), std::move(masks)};
}

}  // namespace

void HeterogeneitySpec::validate() const {
  if (d < 1 || k < 1) throw SpecError("d and k must be positive");
  if (pi_p.empty() || pi_p.size() != pi_i.size()) {
    throw SpecError("pi_p and pi_i must be non-empty and of equal length");
  }
  double sum = 0.0;
  for (std::size_t g = 0; g < pi_p.size(); ++g) {
    if (!(pi_p[g] > 0.0 && pi_p[g] <= 1.0) || !(pi_i[g] > 0.0 && pi_i[g] <= 1.0)) {
      throw SpecError("proportions must lie in (0, 1]");
    }
    if (g > 0 && !(pi_p[g] < pi_p[g - 1])) {
      throw SpecError("pi_p must be strictly decreasing");
    }
    sum += pi_p[g];
  }
  if (sum > 1.0 + kIntegralTol) {
    throw SpecError("path proportions sum to more than 1 (cumulative path demand exceeds d^2)");
  }
  if (!(value_lb > 0.0 && value_lb <= value_ub)) {
    throw SpecError("coefficient bounds must satisfy 0 < value_lb <= value_ub");
  }
  if (!(stability_target > 0.0 && stability_target < 1.0)) {
    throw SpecError("stability_target must lie in (0, 1)");
  }
  (void)group_path_counts();
  (void)group_subject_counts();
}

std::vector<int> HeterogeneitySpec::group_path_counts() const {
  std::vector<int> out;
  for (std::size_t g = 0; g < pi_p.size(); ++g) out.push_back(integral_count(pi_p[g], d * d, "pi_p", g));
  return out;
}

std::vector<int> HeterogeneitySpec::group_subject_counts() const {
  std::vector<int> out;
  for (std::size_t g = 0; g < pi_i.size(); ++g) out.push_back(integral_count(pi_i[g], k, "pi_i", g));
  return out;
}

HeterogeneityCondition parse_condition(const std::string& name) {
  if (name == "no" || name == "none") return HeterogeneityCondition::none;
  if (name == "low") return HeterogeneityCondition::low;
  if (name == "high") return HeterogeneityCondition::high;
  throw SpecError("unknown heterogeneity condition '" + name + "' (expected no|low|high)");
}

std::string to_string(HeterogeneityCondition c) {
  switch (c) {
    case HeterogeneityCondition::none: return "no";
    case HeterogeneityCondition::low: return "low";
    case HeterogeneityCondition::high: return "high";
  }
  return "?";
}

HeterogeneitySpec condition_spec(HeterogeneityCondition c, int d, int k) {
  HeterogeneitySpec spec;
  spec.d = d;
  spec.k = k;
  switch (c) {
    case HeterogeneityCondition::none:
      spec.pi_p = {1.0 / 4.0};
      spec.pi_i = {1.0};
      break;
    case HeterogeneityCondition::low:
      spec.pi_p = {1.0 / 5.0, 1.0 / 10.0, 1.0 / 20.0};
      spec.pi_i = {1.0, 2.0 / 3.0, 1.0 / 3.0};
      break;
    case HeterogeneityCondition::high:
      spec.pi_p = {1.0 / 5.0, 1.0 / 10.0, 1.0 / 20.0};
      spec.pi_i = {1.0 / 3.0, 2.0 / 3.0, 1.0};
      break;
  }
  return spec;
}

SupportAssignment assign_supports(const HeterogeneitySpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto paths_per_group = spec.group_path_counts();
  const auto subjects_per_group = spec.group_subject_counts();
  const int n_paths = spec.d * spec.d;
  if (std::accumulate(paths_per_group.begin(), paths_per_group.end(), 0) > n_paths) {
    throw SpecError("cumulative path demand exceeds d^2");
  }

  Rng rng(derive_seed(seed, {1}));
  SupportAssignment out;
  out.subject_masks.assign(static_cast<std::size_t>(spec.k), SupportMask::Constant(spec.d, spec.d, false));

  std::vector<int> unused = iota_vector(n_paths);
  for (std::size_t g = 0; g < paths_per_group.size(); ++g) {
    auto paths = sample_without_replacement(unused, paths_per_group[g], rng);
    auto subjects = sample_without_replacement(iota_vector(spec.k), subjects_per_group[g], rng);
    std::erase_if(unused, [&](int idx) { return std::binary_search(paths.begin(), paths.end(), idx); });
    for (int s : subjects) {
      auto& mask = out.subject_masks[static_cast<std::size_t>(s)];
      for (int idx : paths) mask(idx % spec.d, idx / spec.d) = true;
    }
    out.group_paths.push_back(std::move(paths));
    out.group_subjects.push_back(std::move(subjects));
  }
  return out;
}

VarModel rescale_to_stability(const VarModel& model, double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw SpecError("stability target must lie in (0, 1)");
  }
  const double rho = spectral_radius(model);
  if (rho <= target) return model;
  const double factor = target / rho;
  std::vector<Matrix> phi = model.phi();
  double scale = 1.0;
  for (auto& m : phi) {
    scale *= factor;
    m *= scale;
  }
  return VarModel(std::move(phi), model.noise_cov());
}

std::vector<VarModel> draw_coefficients(const std::vector<SupportMask>& masks, double value_lb,
                                        double value_ub, double stability_target, bool random_sign,
                                        std::uint64_t seed) {
  std::vector<VarModel> models;
  models.reserve(masks.size());
  for (std::size_t k = 0; k < masks.size(); ++k) {
    const auto& mask = masks[k];
    Rng rng(derive_seed(seed, {2, k}));
    std::uniform_real_distribution<double> magnitude(value_lb, value_ub);
    std::bernoulli_distribution coin(0.5);
    Matrix phi = Matrix::Zero(mask.rows(), mask.cols());
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        if (!mask(i, j)) continue;
        double v = value_lb == value_ub ? value_lb : magnitude(rng);
        if (random_sign && coin(rng)) v = -v;
        phi(i, j) = v;
      }
    }
    models.push_back(rescale_to_stability(VarModel::from_stacked(phi, 1), stability_target));
  }
  return models;
}

std::vector<VarModel> draw_coefficients(const std::vector<SupportMask>& masks,
                                        const HeterogeneitySpec& spec, std::uint64_t seed) {
  return draw_coefficients(masks, spec.value_lb, spec.value_ub, spec.stability_target, spec.random_sign,
                           seed);
}

GeneratedDataset generate_dataset(const HeterogeneitySpec& spec, int t_len, std::uint64_t seed,
                                  int burn_in) {
  auto assignment = assign_supports(spec, seed);
  auto models = draw_coefficients(assignment.subject_masks, spec, seed);
  return simulate_from(std::move(models), std::move(assignment.subject_masks), t_len, seed, burn_in);
}

GeneratedDataset generate_common_unique(const CommonUniqueSpec& spec, int t_len, std::uint64_t seed,
                                        int burn_in) {
  if (spec.k < 1 || spec.d < 1) throw SpecError("k and d must be positive");
  if (spec.prop_fill_com < 0.0 || spec.prop_fill_ind < 0.0 ||
      spec.prop_fill_com + spec.prop_fill_ind > 1.0 + kIntegralTol) {
    throw SpecError("prop_fill_com + prop_fill_ind must lie in [0, 1]");
  }
  if (!(spec.value_lb > 0.0 && spec.value_lb <= spec.value_ub)) {
    throw SpecError("coefficient bounds must satisfy 0 < lb <= ub");
  }
  const int n_paths = spec.d * spec.d;
  const int n_common = static_cast<int>(std::floor(spec.prop_fill_com * n_paths + kIntegralTol));
  const int n_unique = static_cast<int>(std::floor(spec.prop_fill_ind * n_paths + kIntegralTol));
  if (n_common + spec.k * n_unique > n_paths) {
    std::ostringstream msg;
    msg << n_common << " common + " << spec.k << " x " << n_unique
        << " disjoint unique paths exceed the " << n_paths << " available";
    throw SpecError(msg.str());
  }

  Rng rng(derive_seed(seed, {4}));
  std::vector<int> unused = iota_vector(n_paths);
  auto take = [&](int n) {
    auto chosen = sample_without_replacement(unused, n, rng);
    std::erase_if(unused, [&](int idx) { return std::binary_search(chosen.begin(), chosen.end(), idx); });
    return chosen;
  };

  SupportMask common = SupportMask::Constant(spec.d, spec.d, false);
  for (int idx : take(n_common)) common(idx % spec.d, idx / spec.d) = true;

  std::vector<SupportMask> masks;
  for (int s = 0; s < spec.k; ++s) {
    SupportMask m = common;
    for (int idx : take(n_unique)) m(idx % spec.d, idx / spec.d) = true;
    masks.push_back(std::move(m));
  }
  auto models = draw_coefficients(masks, spec.value_lb, spec.value_ub, spec.stability_target,
                                  spec.random_sign, seed);
  auto out = simulate_from(std::move(models), std::move(masks), t_len, seed, burn_in);
  if (spec.k == 1) out.true_common_support = common;
  return out;
}

SupportMask support_of(const Matrix& m, double zero_tol) { return m.array().abs() > zero_tol; }

}  // namespace multivar
