#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace probetopo {

enum class ErrorCode {
  CycleDetected,
  Disconnected,
  DuplicateNode,
  NonpositiveImpedance,
  MissingRoot,
  UnknownNode,
  LeafNotProbed,
  NonpositiveRmin,
  UnknownProbingBus,
  RankDeficientProbing,
  InvalidPlan,
  InconsistentLevelSets,
  AmbiguousIntersection,
  AssumptionViolated,
  EmptyPartition,
  InconsistentMeteredSets,
  LabelMismatch,
  ParseError,
  ConfigError,
  IoError,
};

/// Stable machine-readable name, e.g. "CycleDetected".
std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace probetopo
