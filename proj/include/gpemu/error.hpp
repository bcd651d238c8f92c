#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpemu {

/// Failure categories raised by the library. Each maps to one named error
/// condition of the public operations.
enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NotPositiveDefinite,
  ConvergenceFailure,
  AllSingularValuesTruncated,
  InvalidKappaMax,
  DomainError,
  InvalidSize,
  DegenerateBounds,
  OutOfBounds,
  UnsupportedNu,
  TooFewPoints,
  RankDeficientBasis,
  NumericalIntegrity,
  SchemaVersionMismatch,
  CorruptFile,
  AlignmentError,
  AllZeroSpectrum,
  NTooLarge,
  EmptyCandidates,
  InvalidLength,
  SimulatorFailure,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gpemu
