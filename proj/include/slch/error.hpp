#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace slch {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, mismatched shapes or anchors.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (p < 1, N < 3, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Time window or shift that leaves the span of a noise path.
class SpanError : public Error {
 public:
  SpanError(const std::string& what, double admissible_lo, double admissible_hi)
      : Error(what), admissible_lo_(admissible_lo), admissible_hi_(admissible_hi) {}

  double admissible_lo() const noexcept { return admissible_lo_; }
  double admissible_hi() const noexcept { return admissible_hi_; }

 private:
  double admissible_lo_;
  double admissible_hi_;
};

/// Drift evaluated in the wrong noise regime (k = 0 versus k > 0).
class WrongRegimeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or exploding state during integration.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double last_finite_time, std::vector<double> norm_history)
      : Error(what), last_finite_time_(last_finite_time), norm_history_(std::move(norm_history)) {}

  double last_finite_time() const noexcept { return last_finite_time_; }
  const std::vector<double>& norm_history() const noexcept { return norm_history_; }

 private:
  double last_finite_time_;
  std::vector<double> norm_history_;
};

}  // namespace slch
