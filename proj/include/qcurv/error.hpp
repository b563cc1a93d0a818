#pragma once

#include <stdexcept>
#include <string>

namespace qcurv {

enum class ErrorKind {
  InvalidModel,
  Unsupported,
  InvalidArgument,
  DiscretizationMismatch,
  NonFinite,
  NonPositiveOperator,
  NonPositiveFactor,
  Precondition,
  FitFailure,
  StepUnderflow,
  PositivityLoss,
  NoConvergence,
  Config,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qcurv
