#pragma once

#include <stdexcept>
#include <string>

namespace amlab {

/// Failure categories shared by every module. The CLI maps a few of them
/// onto process exit codes.
enum class ErrorKind {
  InvalidInput,
  AmbiguousLift,
  Resolution,
  DegenerateLoop,
  Convergence,
  NotTonelli,
  InconsistentDerivatives,
  IllConditioned,
  IntegrationFailure,
  InsufficientData,
  BelowCritical,
  Bracketing,
  Refinement,
  Inapplicable,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace amlab
