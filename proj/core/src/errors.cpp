#include "probetopo/errors.hpp"

#include "probetopo/types.hpp"

namespace probetopo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::NonpositiveImpedance: return "NonpositiveImpedance";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::LeafNotProbed: return "LeafNotProbed";
    case ErrorCode::NonpositiveRmin: return "NonpositiveRmin";
    case ErrorCode::UnknownProbingBus: return "UnknownProbingBus";
    case ErrorCode::RankDeficientProbing: return "RankDeficientProbing";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::InconsistentLevelSets: return "InconsistentLevelSets";
    case ErrorCode::AmbiguousIntersection: return "AmbiguousIntersection";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::InconsistentMeteredSets: return "InconsistentMeteredSets";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Mode mode) noexcept {
  return mode == Mode::Complete ? "complete" : "partial";
}

Mode parse_mode(std::string_view text) {
  if (text == "complete") return Mode::Complete;
  if (text == "partial") return Mode::Partial;
  throw Error(ErrorCode::ConfigError,
              "mode must be 'complete' or 'partial', got '" + std::string(text) + "'");
}

}  // namespace probetopo
