#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fgf {

enum class ErrorCode {
  // configuration
  InvalidConfig,
  InvalidMetric,
  KOutOfRange,
  InvalidSpec,
  // data
  FileNotFound,
  ParseError,
  NonFiniteValue,
  DimensionMismatch,
  LengthMismatch,
  IoError,
  ZeroVector,
  BothEmpty,
  ContextIncomplete,
  NodeCountMismatch,
  EmptyRow,
  ClassTooSmall,
  EmptyTrainSet,
  InsufficientData,
  // numeric
  Divergence,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for a failure: 2 config, 3 data, 4 numeric.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fgf
