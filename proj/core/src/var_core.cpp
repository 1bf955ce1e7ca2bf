#include "multivar/var_core.hpp"

#include "multivar/error.hpp"
#include "multivar/seeding.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace multivar {

namespace {

constexpr double kSymmetryTol = 1e-10;

void check_noise_cov(const Matrix& cov, int d) {
  if (cov.rows() != d || cov.cols() != d) {
    throw DimensionError("noise covariance must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw DimensionError("noise covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kSymmetryTol) {
    throw DimensionError("noise covariance has a negative eigenvalue");
  }
}

// Symmetric square root factor of a PSD matrix (L with L L^T = cov).
Matrix psd_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

VarModel::VarModel(std::vector<Matrix> phi, Matrix noise_cov)
    : phi_(std::move(phi)), noise_cov_(std::move(noise_cov)) {
  if (phi_.empty()) {
    throw DimensionError("VAR model needs at least one lag matrix");
  }
  const auto d = phi_.front().rows();
  if (d < 1) {
    throw DimensionError("VAR model dimension must be >= 1");
  }
  for (const auto& m : phi_) {
    if (m.rows() != d || m.cols() != d) {
      throw DimensionError("all lag matrices must be square with identical dimension");
    }
  }
  check_noise_cov(noise_cov_, static_cast<int>(d));
}

VarModel VarModel::from_stacked(const Matrix& stacked, int p, Matrix noise_cov) {
  if (p < 1 || stacked.cols() != stacked.rows() * p) {
    throw DimensionError("stacked coefficient matrix must be d x (d*p)");
  }
  const auto d = stacked.rows();
  std::vector<Matrix> phi;
  phi.reserve(static_cast<std::size_t>(p));
  for (int l = 0; l < p; ++l) {
    phi.emplace_back(stacked.middleCols(l * d, d));
  }
  return VarModel(std::move(phi), std::move(noise_cov));
}

VarModel VarModel::from_stacked(const Matrix& stacked, int p) {
  return from_stacked(stacked, p, Matrix::Identity(stacked.rows(), stacked.rows()));
}

Matrix VarModel::stacked() const {
  const int d = dim();
  Matrix out(d, d * lag_order());
  for (int l = 0; l < lag_order(); ++l) {
    out.middleCols(l * d, d) = phi_[static_cast<std::size_t>(l)];
  }
  return out;
}

MultiSubjectSeries::MultiSubjectSeries(std::vector<SubjectSeries> subjects)
    : subjects_(std::move(subjects)) {
  if (subjects_.empty()) {
    throw DimensionError("at least one subject is required");
  }
  const int d = subjects_.front().dim();
  if (d < 1) {
    throw DimensionError("series must have at least one variable");
  }
  for (const auto& s : subjects_) {
    if (s.dim() != d) {
      throw DimensionError("subject '" + s.subject_id + "' has " + std::to_string(s.dim()) +
                           " variables, expected " + std::to_string(d));
    }
    if (!s.data.allFinite()) {
      throw DimensionError("subject '" + s.subject_id + "' contains non-finite values");
    }
  }
}

int MultiSubjectSeries::min_length() const {
  int m = subjects_.empty() ? 0 : subjects_.front().length();
  for (const auto& s : subjects_) m = std::min(m, s.length());
  return m;
}

Vector lag_vector(const Matrix& data, int t, int p) {
  const auto d = data.rows();
  Vector z(d * p);
  for (int l = 1; l <= p; ++l) {
    z.segment((l - 1) * d, d) = data.col(t - l);
  }
  return z;
}

RegressionForm build_regression(const SubjectSeries& series, int p) {
  return build_regression(series, p, [](int) { return true; });
}

RegressionForm build_regression(const SubjectSeries& series, int p,
                                const std::function<bool(int)>& keep) {
  if (p < 1) {
    throw DimensionError("lag order must be >= 1");
  }
  const int t_len = series.length();
  if (t_len < p + 2) {
    std::ostringstream msg;
    msg << "series '" << series.subject_id << "' has " << t_len
        << " time points; lag order " << p << " requires at least " << p + 2;
    throw DimensionError(msg.str());
  }
  std::vector<int> targets;
  targets.reserve(static_cast<std::size_t>(t_len - p));
  for (int t = p; t < t_len; ++t) {
    if (keep(t)) targets.push_back(t);
  }
  const auto d = series.data.rows();
  RegressionForm reg{Matrix(d, static_cast<Eigen::Index>(targets.size())),
                     Matrix(d * p, static_cast<Eigen::Index>(targets.size()))};
  for (std::size_t c = 0; c < targets.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    reg.y.col(col) = series.data.col(targets[c]);
    for (int l = 1; l <= p; ++l) {
      reg.z.block((l - 1) * d, col, d, 1) = series.data.col(targets[c] - l);
    }
  }
  return reg;
}

Matrix companion_matrix(const VarModel& model) {
  const int p = model.lag_order();
  if (p == 1) {
    return model.phi(0);
  }
  const int d = model.dim();
  Matrix comp = Matrix::Zero(d * p, d * p);
  comp.topRows(d) = model.stacked();
  comp.bottomLeftCorner(d * (p - 1), d * (p - 1)).setIdentity();
  return comp;
}

double spectral_radius(const Matrix& square) {
  if (square.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(square, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_radius(const VarModel& model) { return spectral_radius(companion_matrix(model)); }

bool is_stable(const VarModel& model, double margin) { return spectral_radius(model) < margin; }

SubjectSeries simulate_var(const VarModel& model, int t_len, int burn_in, std::uint64_t seed,
                           const std::optional<Matrix>& initial) {
  if (t_len < 1 || burn_in < 0) {
    throw DimensionError("simulate_var needs t_len >= 1 and burn_in >= 0");
  }
  const double rho = spectral_radius(model);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "refusing to simulate an unstable VAR (spectral radius " << rho << ")";
    throw UnstableModelError(msg.str(), rho);
  }
  const int d = model.dim();
  const int p = model.lag_order();
  const Matrix stacked = model.stacked();
  const Matrix chol = psd_factor(model.noise_cov());

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int total = burn_in + t_len;
  Matrix path = Matrix::Zero(d, p + total);
  if (initial) {
    if (initial->rows() != d || initial->cols() != p) {
      throw DimensionError("initial state must be d x p");
    }
    // column l of `initial` is x_{-l}; lay them out oldest first
    for (int l = 0; l < p; ++l) path.col(p - 1 - l) = initial->col(l);
  }
  Vector shock(d);
  for (int t = p; t < p + total; ++t) {
    for (int i = 0; i < d; ++i) shock(i) = normal(rng);
    path.col(t) = stacked * lag_vector(path, t, p) + chol * shock;
  }
  return SubjectSeries{path.rightCols(t_len), {}};
}

OlsFit fit_ols(const SubjectSeries& series, int p) { return fit_ols(build_regression(series, p), p); }

OlsFit fit_ols(const RegressionForm& reg, int p) {
  const auto d = reg.y.rows();
  if (reg.z.rows() != d * p || reg.z.cols() != reg.y.cols()) {
    throw DimensionError("regression form does not match lag order");
  }
  if (reg.num_obs() < 1) {
    throw DimensionError("regression form has no observations");
  }
  // Z^T Phi^T = Y^T, minimum-norm in the rank-deficient case
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(reg.z.transpose());
  Matrix phi = cod.solve(reg.y.transpose()).transpose();
  const Matrix resid = reg.y - phi * reg.z;
  Matrix cov = resid * resid.transpose() / static_cast<double>(reg.num_obs());
  cov = 0.5 * (cov + cov.transpose());
  const int rank = static_cast<int>(cod.rank());
  return OlsFit{VarModel::from_stacked(phi, p, std::move(cov)), rank, rank < d * p};
}

Vector center_in_place(SubjectSeries& series) {
  Vector means = series.data.rowwise().mean();
  series.data.colwise() -= means;
  return means;
}

}  // namespace multivar
