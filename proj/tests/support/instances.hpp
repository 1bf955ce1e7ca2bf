#pragma once

// Random small multi-subject problems shared by the unit and acceptance tests.

#include "multivar/simulator.hpp"
#include "multivar/solver.hpp"
#include "oracles.hpp"

#include <random>

namespace testing_support {

struct RandomInstance {
  multivar::MultiVarProblem problem;
  multivar::PenaltySpec pen;
  oracle::Instance oracle;
};

// Stable sparse VAR(1) data for k subjects, random adaptive weights in
// [0.5, 2] and penalties drawn as fractions of their max levels.
inline RandomInstance random_instance(int d, int k, int t_len, std::uint64_t seed, bool weighted = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<multivar::RegressionForm> forms;
  for (int s = 0; s < k; ++s) {
    multivar::Matrix phi = multivar::Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      if (u(rng) < 0.5) phi(i) = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 0.5 * u(rng));
    }
    auto model = multivar::rescale_to_stability(multivar::VarModel({phi}, multivar::Matrix::Identity(d, d)), 0.9);
    forms.push_back(multivar::build_regression(multivar::simulate_var(model, t_len, 50, rng()), 1));
  }
  multivar::MultiVarProblem problem(forms, 1);

  std::optional<multivar::AdaptiveWeights> weights;
  oracle::Instance in;
  in.w0 = multivar::Matrix::Ones(d, d);
  in.wk.assign(static_cast<std::size_t>(k), multivar::Matrix::Ones(d, d));
  if (weighted) {
    auto draw = [&] {
      multivar::Matrix w(d, d);
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = 0.5 + 1.5 * u(rng);
      return w;
    };
    in.w0 = draw();
    for (auto& w : in.wk) w = draw();
    weights = multivar::AdaptiveWeights{in.w0, in.wk, 1.0, multivar::kDefaultWeightCap};
  }
  const auto lmax = multivar::lambda_max(problem, weights);
  multivar::PenaltySpec pen;
  pen.lambda1 = lmax.lambda1 * (0.02 + 0.6 * u(rng));
  for (int s = 0; s < k; ++s) pen.lambda2.push_back(lmax.lambda2[static_cast<std::size_t>(s)] * (0.02 + 0.6 * u(rng)));
  pen.weights = weights;

  for (const auto& f : forms) {
    in.y.push_back(f.y);
    in.z.push_back(f.z);
  }
  in.lambda1 = pen.lambda1;
  in.lambda2 = pen.lambda2;
  return RandomInstance{std::move(problem), std::move(pen), std::move(in)};
}

}  // namespace testing_support
