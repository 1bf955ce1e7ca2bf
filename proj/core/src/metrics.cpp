#include "multivar/metrics.hpp"

#include "multivar/csv.hpp"
#include "multivar/error.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace multivar {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "matrix shapes differ: " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw DimensionError(msg.str());
  }
}

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ConfusionCounts confusion(const Matrix& truth, const Matrix& estimate, double zero_tol) {
  check_same_shape(truth, estimate);
  if (zero_tol < 0.0) throw SpecError("zero_tol must be >= 0");
  ConfusionCounts c;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      const bool t = std::abs(truth(i, j)) > zero_tol;
      const bool e = std::abs(estimate(i, j)) > zero_tol;
      if (t && e) ++c.tp;
      else if (!t && !e) ++c.tn;
      else if (e) ++c.fp;
      else ++c.fn;
    }
  }
  return c;
}

ConfusionCounts confusion(const VarModel& truth, const Matrix& estimate, double zero_tol) {
  return confusion(truth.stacked(), estimate, zero_tol);
}

double mcc(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

double sensitivity(const ConfusionCounts& c) {
  return ratio_or_zero(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}

double specificity(const ConfusionCounts& c) {
  return ratio_or_zero(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fp));
}

BiasRmse bias_rmse(const Matrix& truth, const Matrix& estimate) {
  check_same_shape(truth, estimate);
  const auto diff = (estimate - truth).array();
  const double n = static_cast<double>(truth.size());
  return BiasRmse{diff.abs().sum() / n, std::sqrt(diff.square().sum() / n)};
}

BiasRmse bias_rmse(const std::vector<Matrix>& truths, const std::vector<Matrix>& estimates) {
  if (truths.size() != estimates.size() || truths.empty()) {
    throw DimensionError("bias_rmse needs one estimate per true matrix");
  }
  BiasRmse out;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    const auto br = bias_rmse(truths[k], estimates[k]);
    out.bias += br.bias;
    out.rmse += br.rmse;
  }
  out.bias /= static_cast<double>(truths.size());
  out.rmse /= static_cast<double>(truths.size());
  return out;
}

MetricsReport evaluate(const std::vector<Matrix>& truths, const std::vector<Matrix>& estimates, double zero_tol) {
  if (truths.size() != estimates.size() || truths.empty()) {
    throw DimensionError("evaluate needs one estimate per true matrix");
  }
  MetricsReport r;
  r.zero_tol = zero_tol;
  for (std::size_t k = 0; k < truths.size(); ++k) {
    SubjectMetrics s;
    s.counts = confusion(truths[k], estimates[k], zero_tol);
    s.mcc = mcc(s.counts);
    s.sensitivity = sensitivity(s.counts);
    s.specificity = specificity(s.counts);
    const auto br = bias_rmse(truths[k], estimates[k]);
    s.bias = br.bias;
    s.rmse = br.rmse;
    r.mean_mcc += s.mcc;
    r.mean_sensitivity += s.sensitivity;
    r.mean_specificity += s.specificity;
    r.mean_bias += s.bias;
    r.mean_rmse += s.rmse;
    r.subjects.push_back(s);
  }
  const double k = static_cast<double>(truths.size());
  r.mean_mcc /= k;
  r.mean_sensitivity /= k;
  r.mean_specificity /= k;
  r.mean_bias /= k;
  r.mean_rmse /= k;
  return r;
}

MetricsReport evaluate(const std::vector<VarModel>& truths, const std::vector<Matrix>& estimates, double zero_tol) {
  std::vector<Matrix> stacked;
  stacked.reserve(truths.size());
  for (const auto& m : truths) stacked.push_back(m.stacked());
  return evaluate(stacked, estimates, zero_tol);
}

void write_metrics_row(std::ostream& os, const MetricsKey& key, const MetricsReport& report) {
  os << key.condition << ',' << key.t_len << ',' << key.method << ',' << key.replication << ','
     << format_double(report.mean_mcc) << ',' << format_double(report.mean_sensitivity) << ','
     << format_double(report.mean_specificity) << ',' << format_double(report.mean_bias) << ','
     << format_double(report.mean_rmse) << '\n';
}

std::string metrics_json_row(const MetricsKey& key, const MetricsReport& report) {
  std::ostringstream os;
  os << "{\"condition\":\"" << key.condition << "\",\"T\":" << key.t_len << ",\"method\":\"" << key.method
     << "\",\"replication\":" << key.replication << ",\"mcc\":" << format_double(report.mean_mcc)
     << ",\"sensitivity\":" << format_double(report.mean_sensitivity)
     << ",\"specificity\":" << format_double(report.mean_specificity)
     << ",\"bias\":" << format_double(report.mean_bias) << ",\"rmse\":" << format_double(report.mean_rmse) << "}";
  return os.str();
}

}  // namespace multivar
