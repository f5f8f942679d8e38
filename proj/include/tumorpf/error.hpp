#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tpf {

enum class ErrorCode {
  InvalidArgument,     // bad input values, shape mismatch
  Config,              // configuration parse/validation failure
  SeparationViolation, // phase field left the potential's domain
  UnsupportedOrder,    // derivative order not available for this potential
  SolverDivergence,    // Newton failed to converge
  StepRejected,        // Newton failed after all retries
  SingularMatrix,      // per-step factorization failed
  LineSearchFailure,   // Armijo backtracking exhausted
  ConeTrivial,         // every SSC sample projected to zero
  Hypothesis,          // model hypothesis not met (b2 != 0, nonsmooth data)
  Io
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a value leaves the open interval (lower, upper) on which a
/// singular potential is differentiable.
class SeparationViolation : public Error {
 public:
  SeparationViolation(double value, double lower, double upper,
                      std::ptrdiff_t node = -1, std::ptrdiff_t step = -1);

  double value() const noexcept { return value_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  std::ptrdiff_t node() const noexcept { return node_; }
  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  double value_, lower_, upper_;
  std::ptrdiff_t node_, step_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace tpf
