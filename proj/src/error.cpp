#include "nedstokes/error.hpp"

namespace nedstokes {

std::string_view to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Configuration: return "configuration";
    case ErrorCategory::InvalidInput: return "invalid_input";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Assembly: return "assembly";
    case ErrorCategory::StructurallySingular: return "structurally_singular";
    case ErrorCategory::NumericallySingular: return "numerically_singular";
    case ErrorCategory::ShiftAtEigenvalue: return "shift_at_eigenvalue";
    case ErrorCategory::Unconverged: return "unconverged";
    case ErrorCategory::Unsupported: return "unsupported";
    case ErrorCategory::Tracking: return "tracking";
  }
  return "unknown";
}

}  // namespace nedstokes
