#include "fgf/error.hpp"

namespace fgf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidMetric: return "InvalidMetric";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::ContextIncomplete: return "ContextIncomplete";
    case ErrorCode::NodeCountMismatch: return "NodeCountMismatch";
    case ErrorCode::EmptyRow: return "EmptyRow";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::Divergence: return "Divergence";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidMetric:
    case ErrorCode::KOutOfRange:
    case ErrorCode::InvalidSpec:
      return 2;
    case ErrorCode::Divergence:
      return 4;
    default:
      return 3;
  }
}

}  // namespace fgf
