#include "dichotomy/error.hpp"

#include <cstdio>

namespace dichotomy {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::HyperbolicityViolation: return "HyperbolicityViolation";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::BadLoopIndex: return "BadLoopIndex";
    case ErrorKind::RankDiscontinuity: return "RankDiscontinuity";
    case ErrorKind::FramesNotAdjacent: return "FramesNotAdjacent";
    case ErrorKind::MeshUnresolvable: return "MeshUnresolvable";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::EvaluatorFailure: return "EvaluatorFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::EmptyKernel: return "EmptyKernel";
    case ErrorKind::BadRanks: return "BadRanks";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

std::string format_number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.6g", value);
  return buffer;
}

}  // namespace dichotomy
