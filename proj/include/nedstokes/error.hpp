#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nedstokes {

/// Machine-readable failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  Configuration,
  InvalidInput,
  Io,
  Assembly,
  StructurallySingular,
  NumericallySingular,
  ShiftAtEigenvalue,
  Unconverged,
  Unsupported,
  Tracking,
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Raised by the factorization when a pivot falls below tolerance.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(ErrorCategory category, long pivot, const std::string& what)
      : Error(category, what), pivot_(pivot) {}

  /// Column (original numbering) at which the factorization broke down, or -1.
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

}  // namespace nedstokes
