#pragma once

#include <stdexcept>
#include <string>

namespace lowmach {

/// Input that violates a documented precondition (bad dimension, nonpositive
/// density, malformed configuration). `field()` names the offending input.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& message, std::string field = {})
      : std::invalid_argument(message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A computation that had to stop because the numerics broke down
/// (density floor breach, non-finite values).
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A verification check that was asked to hold and did not.
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message, const std::string& field = {}) {
  if (!condition) throw ValidationError(message, field);
}

}  // namespace lowmach
