#include "gpemu/error.hpp"

namespace gpemu {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::AllSingularValuesTruncated: return "AllSingularValuesTruncated";
    case ErrorKind::InvalidKappaMax: return "InvalidKappaMax";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidSize: return "InvalidSize";
    case ErrorKind::DegenerateBounds: return "DegenerateBounds";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::UnsupportedNu: return "UnsupportedNu";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorKind::NumericalIntegrity: return "NumericalIntegrity";
    case ErrorKind::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorKind::CorruptFile: return "CorruptFile";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::AllZeroSpectrum: return "AllZeroSpectrum";
    case ErrorKind::NTooLarge: return "NTooLarge";
    case ErrorKind::EmptyCandidates: return "EmptyCandidates";
    case ErrorKind::InvalidLength: return "InvalidLength";
    case ErrorKind::SimulatorFailure: return "SimulatorFailure";
  }
  return "Unknown";
}

}  // namespace gpemu
