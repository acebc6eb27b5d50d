#pragma once

#include <stdexcept>
#include <string>

namespace lrk {

enum class ErrorCode {
  InvalidGrid,
  SingularMass,
  OutOfDomain,
  NotPositive,
  ShapeMismatch,
  NotSPD,
  RankRequestTooLarge,
  RankDeficient,
  SingularSystem,
  SkipConditionViolated,
  InvariantViolation,
  CaseUnavailable,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace lrk
