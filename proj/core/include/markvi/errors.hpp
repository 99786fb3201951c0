#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace markvi {

/// Invalid user-supplied parameter (dimension 0, nonpositive scale, bad grid...).
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed its contract: power iteration hit the cap,
/// a linear solve left too large a residual, a cross-check disagreed.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Solver iterate became non-finite or left the trust region. Carries the
/// step index at which the blow-up was detected.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::int64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }

private:
  std::int64_t step_;
};

/// A StepSample was used outside the step that produced it. Both operator
/// evaluations of an extragradient step must consume the same sample.
class StaleSampleError : public std::logic_error {
public:
  explicit StaleSampleError(const std::string& what) : std::logic_error(what) {}
};

/// Filesystem / parse failure on instance, config, or report files.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace markvi
