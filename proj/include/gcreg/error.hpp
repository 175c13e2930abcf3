#pragma once

#include <stdexcept>
#include <string>

namespace gcreg {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  UnsupportedFormat,
  CorruptFile,
  IoFailure,
  SingularBlock,
  NonFinite,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::SingularBlock: return "SingularBlock";
    case ErrorKind::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the registration drivers when the iteration cannot continue.
class SolverAbort : public Error {
 public:
  SolverAbort(ErrorKind kind, const std::string& what, int iteration)
      : Error(kind, what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace gcreg
