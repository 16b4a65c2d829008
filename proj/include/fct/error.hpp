#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fct {

enum class ErrorCode {
  InvalidInput,
  ConfigError,
  IoError,
  EmptyResult,
  NotCollapsible,
  PartitionOutOfRange,
  PatternMismatch,
  MissingJoinValue,
  InvalidRate,
  InvalidReducerCount,
  TooLarge,
  JobFailed,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fct
