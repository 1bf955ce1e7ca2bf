#pragma once

#include <stdexcept>
#include <string>

namespace multivar {

/// Inputs whose shapes do not fit together (too-short series, mismatched d).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation or configuration specification that violates its invariants.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external input: CSV bundles, manifests, CLI configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Refusal to simulate from a model outside the stationarity region.
class UnstableModelError : public std::runtime_error {
 public:
  UnstableModelError(const std::string& what, double radius)
      : std::runtime_error(what), spectral_radius_(radius) {}
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

/// The proximal-gradient iteration produced a non-finite objective.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration, double step)
      : std::runtime_error(what), iteration_(iteration), step_(step) {}
  int iteration() const noexcept { return iteration_; }
  double step() const noexcept { return step_; }

 private:
  int iteration_;
  double step_;
};

}  // namespace multivar
