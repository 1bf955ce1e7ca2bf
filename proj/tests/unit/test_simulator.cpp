#include "multivar/error.hpp"
#include "multivar/simulator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

namespace multivar {
namespace {

int count(const SupportMask& m) { return static_cast<int>(m.count()); }

TEST(Spec, PresetsAreExact) {
  const auto no = condition_spec(HeterogeneityCondition::none);
  EXPECT_EQ(no.pi_p, std::vector<double>{0.25});
  EXPECT_EQ(no.pi_i, std::vector<double>{1.0});
  const auto low = condition_spec(HeterogeneityCondition::low);
  EXPECT_EQ(low.group_path_counts(), (std::vector<int>{20, 10, 5}));
  EXPECT_EQ(low.group_subject_counts(), (std::vector<int>{15, 10, 5}));
  const auto high = condition_spec(HeterogeneityCondition::high);
  EXPECT_EQ(high.group_path_counts(), (std::vector<int>{20, 10, 5}));
  EXPECT_EQ(high.group_subject_counts(), (std::vector<int>{5, 10, 15}));
  EXPECT_EQ(parse_condition("no"), HeterogeneityCondition::none);
  EXPECT_THROW(parse_condition("medium"), SpecError);
}

TEST(Spec, RejectsViolations) {
  HeterogeneitySpec s;
  s.pi_p = {0.1, 0.2};
  s.pi_i = {1.0, 1.0};
  EXPECT_THROW(s.validate(), SpecError);  // not decreasing
  s.pi_p = {0.7, 0.5};
  EXPECT_THROW(s.validate(), SpecError);  // sums past 1
  s.pi_p = {0.25};
  s.pi_i = {0.5};  // 7.5 subjects
  EXPECT_THROW(s.validate(), SpecError);
  s.pi_i = {1.0};
  s.pi_p = {0.255};  // 25.5 paths
  EXPECT_THROW(s.validate(), SpecError);
  s.pi_p = {0.25};
  s.value_lb = 0.0;
  EXPECT_THROW(s.validate(), SpecError);
  s.value_lb = 0.1;
  EXPECT_NO_THROW(s.validate());
}

TEST(AssignSupports, HighHeterogeneityGroups) {
  const auto a = assign_supports(condition_spec(HeterogeneityCondition::high), 7);
  ASSERT_EQ(a.group_paths.size(), 3u);
  EXPECT_EQ(a.group_paths[0].size(), 20u);
  EXPECT_EQ(a.group_subjects[0].size(), 5u);
  EXPECT_EQ(a.group_paths[1].size(), 10u);
  EXPECT_EQ(a.group_subjects[1].size(), 10u);
  EXPECT_EQ(a.group_paths[2].size(), 5u);
  EXPECT_EQ(a.group_subjects[2].size(), 15u);
  std::set<int> all;
  for (const auto& g : a.group_paths) all.insert(g.begin(), g.end());
  EXPECT_EQ(all.size(), 35u);  // path sets are disjoint
  // each subject's mask is exactly the union of its groups
  for (int k = 0; k < 15; ++k) {
    SupportMask expected = SupportMask::Constant(10, 10, false);
    for (std::size_t g = 0; g < 3; ++g) {
      const auto& subj = a.group_subjects[g];
      if (std::find(subj.begin(), subj.end(), k) == subj.end()) continue;
      for (int idx : a.group_paths[g]) expected(idx % 10, idx / 10) = true;
    }
    EXPECT_TRUE((a.subject_masks[static_cast<std::size_t>(k)] == expected).all()) << "subject " << k;
  }
}

TEST(AssignSupports, NoHeterogeneityIdenticalMasks) {
  const auto a = assign_supports(condition_spec(HeterogeneityCondition::none), 3);
  for (const auto& m : a.subject_masks) {
    EXPECT_EQ(count(m), 25);
    EXPECT_TRUE((m == a.subject_masks.front()).all());
  }
}

TEST(AssignSupports, FullSaturation) {
  HeterogeneitySpec s;
  s.pi_p = {1.0};
  s.pi_i = {1.0};
  s.d = 2;
  s.k = 3;
  for (const auto& m : assign_supports(s, 1).subject_masks) EXPECT_TRUE(m.all());
}

TEST(DrawCoefficients, DegenerateInterval) {
  SupportMask m = SupportMask::Constant(10, 10, false);
  m(0, 0) = m(3, 2) = m(5, 9) = true;
  const auto models = draw_coefficients({m}, 0.3, 0.3, 0.95, true, 11);
  const Matrix& phi = models.front().phi(0);
  for (Eigen::Index j = 0; j < 10; ++j) {
    for (Eigen::Index i = 0; i < 10; ++i) {
      if (m(i, j)) {
        EXPECT_DOUBLE_EQ(std::abs(phi(i, j)), 0.3);
      } else {
        EXPECT_EQ(phi(i, j), 0.0);
      }
    }
  }
}

TEST(DrawCoefficients, MagnitudesInsideBounds) {
  // a strictly lower-triangular support is nilpotent, so no rescaling happens
  SupportMask m = SupportMask::Constant(10, 10, false);
  for (int j = 0; j < 10; ++j) {
    for (int i = j + 1; i < 10; ++i) m(i, j) = true;
  }
  double lo = 1.0;
  double hi = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; n < 10000; ++seed) {
    const Matrix phi = draw_coefficients({m}, 0.1, 0.9, 0.95, false, seed).front().phi(0);
    for (Eigen::Index j = 0; j < 10; ++j) {
      for (Eigen::Index i = j + 1; i < 10; ++i, ++n) {
        lo = std::min(lo, phi(i, j));
        hi = std::max(hi, phi(i, j));
      }
    }
  }
  EXPECT_GE(lo, 0.1);
  EXPECT_LE(hi, 0.9);
  EXPECT_LT(lo, 0.11);
  EXPECT_GT(hi, 0.89);
}

TEST(DrawCoefficients, SharedPathDiffersAcrossSubjects) {
  SupportMask m = SupportMask::Constant(10, 10, false);
  m(2, 1) = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto models = draw_coefficients({m, m}, 0.1, 0.9, 0.95, false, seed);
    EXPECT_NE(models[0].phi(0)(2, 1), models[1].phi(0)(2, 1));
  }
}

TEST(Rescale, AlreadyStableUnchanged) {
  const VarModel m({0.4 * Matrix::Identity(3, 3)}, Matrix::Identity(3, 3));
  EXPECT_EQ(rescale_to_stability(m, 0.95).phi(0), m.phi(0));
}

TEST(Rescale, DiagonalScaling) {
  const VarModel m({1.9 * Matrix::Identity(4, 4)}, Matrix::Identity(4, 4));
  EXPECT_LT((rescale_to_stability(m, 0.95).phi(0) - 0.95 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rescale, PreservesPatternAgainstPowerIteration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::bernoulli_distribution on(0.3);
  Matrix phi = Matrix::Zero(10, 10);
  for (Eigen::Index j = 0; j < 10; ++j) {
    for (Eigen::Index i = 0; i < 10; ++i) {
      if (on(rng) || i == j) phi(i, j) = u(rng);
    }
  }
  // nonnegative with a positive diagonal: the Perron root is dominant
  auto power = [](const Matrix& a) {
    Vector v = Vector::Ones(a.rows());
    double lam = 0.0;
    for (int i = 0; i < 20000; ++i) {
      Vector w = a * v;
      lam = w.norm() / v.norm();
      v = w / w.norm();
    }
    return lam;
  };
  phi *= 1.3 / power(phi);
  const auto out = rescale_to_stability(VarModel({phi}, Matrix::Identity(10, 10)), 0.95);
  EXPECT_LE(power(out.phi(0)), 0.95 + 1e-8);
  EXPECT_TRUE(((out.phi(0).array() != 0.0) == (phi.array() != 0.0)).all());
}

TEST(Rescale, LagTwoUsesPowers) {
  Matrix s(1, 2);
  s << 1.2, 0.5;  // unstable AR(2)
  const auto out = rescale_to_stability(VarModel::from_stacked(s, 2), 0.9);
  EXPECT_NEAR(spectral_radius(out), 0.9, 1e-10);
  const double f = out.phi(0)(0, 0) / 1.2;
  EXPECT_NEAR(out.phi(1)(0, 0), 0.5 * f * f, 1e-12);
}

TEST(GenerateDataset, ShapesAndStability) {
  const auto ds = generate_dataset(condition_spec(HeterogeneityCondition::none), 100, 1);
  ASSERT_EQ(ds.series.num_subjects(), 15);
  for (const auto& s : ds.series.subjects()) {
    EXPECT_EQ(s.dim(), 10);
    EXPECT_EQ(s.length(), 100);
  }
  for (std::size_t k = 0; k < 15; ++k) {
    EXPECT_TRUE(is_stable(ds.true_models[k]));
    EXPECT_TRUE((support_of(ds.true_models[k].phi(0)) == ds.true_supports[k]).all());
    EXPECT_TRUE((ds.true_supports[k] == ds.true_supports[0]).all());
  }
  EXPECT_TRUE((ds.true_common_support == ds.true_supports[0]).all());
}

TEST(GenerateDataset, Reproducible) {
  const auto spec = condition_spec(HeterogeneityCondition::low);
  const auto a = generate_dataset(spec, 30, 99);
  const auto b = generate_dataset(spec, 30, 99);
  const auto c = generate_dataset(spec, 30, 100);
  for (std::size_t k = 0; k < 15; ++k) EXPECT_EQ(a.series[k].data, b.series[k].data);
  EXPECT_NE(a.series[0].data, c.series[0].data);
}

TEST(GenerateDataset, MeanDensities) {
  // per-subject density means implied by the group design
  const double expected[] = {0.25, 425.0 / 1500.0, 275.0 / 1500.0};
  const HeterogeneityCondition conds[] = {HeterogeneityCondition::none, HeterogeneityCondition::low,
                                          HeterogeneityCondition::high};
  for (int c = 0; c < 3; ++c) {
    const auto a = assign_supports(condition_spec(conds[c]), 12);
    double total = 0.0;
    for (const auto& m : a.subject_masks) total += count(m) / 100.0;
    EXPECT_NEAR(total / 15.0, expected[c], 1e-12);
  }
}

TEST(CommonUnique, Cases) {
  CommonUniqueSpec s;
  s.k = 3;
  s.d = 10;
  s.prop_fill_com = 0.0;
  s.prop_fill_ind = 0.1;
  auto ds = generate_common_unique(s, 100, 4);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_EQ(count(ds.true_supports[a]), 10);
    for (std::size_t b = a + 1; b < 3; ++b) EXPECT_EQ((ds.true_supports[a] && ds.true_supports[b]).count(), 0);
  }

  s.prop_fill_com = 0.1;
  s.prop_fill_ind = 0.0;
  ds = generate_common_unique(s, 100, 4);
  for (const auto& m : ds.true_supports) {
    EXPECT_EQ(count(m), 10);
    EXPECT_TRUE((m == ds.true_supports[0]).all());
  }

  s.prop_fill_com = 0.05;
  s.prop_fill_ind = 0.05;
  ds = generate_common_unique(s, 100, 4);
  EXPECT_EQ(count(ds.true_common_support), 5);
  for (const auto& m : ds.true_supports) {
    EXPECT_EQ(count(m), 10);
    EXPECT_EQ((m && ds.true_common_support).count(), 5);
  }

  s.prop_fill_com = 0.5;
  s.prop_fill_ind = 0.3;
  EXPECT_THROW(generate_common_unique(s, 100, 4), SpecError);
}

}  // namespace
}  // namespace multivar
