#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dichotomy {

enum class ErrorKind {
  InvalidArgument,
  NotInvertible,
  HyperbolicityViolation,
  MeshTooCoarse,
  BadLoopIndex,
  RankDiscontinuity,
  FramesNotAdjacent,
  MeshUnresolvable,
  RankMismatch,
  WindowTooSmall,
  EvaluatorFailure,
  NoConvergence,
  SingularJacobian,
  EmptyKernel,
  BadRanks,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Shortest "%g"-style rendering used in messages and report details.
std::string format_number(double value);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI in particular) can map it to a report entry or exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dichotomy
