#include "lrk/error.hpp"

namespace lrk {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::RankRequestTooLarge: return "RankRequestTooLarge";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SkipConditionViolated: return "SkipConditionViolated";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::CaseUnavailable: return "CaseUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace lrk
