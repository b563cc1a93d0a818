#include "qcurv/error.hpp"

namespace qcurv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "invalid_model";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DiscretizationMismatch: return "discretization_mismatch";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::NonPositiveOperator: return "non_positive_operator";
    case ErrorKind::NonPositiveFactor: return "non_positive_factor";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::FitFailure: return "fit_failure";
    case ErrorKind::StepUnderflow: return "step_underflow";
    case ErrorKind::PositivityLoss: return "positivity_loss";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace qcurv
