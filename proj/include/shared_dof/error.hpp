#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shared_dof {

enum class ErrorCode {
  InvalidInput,
  DegenerateDirection,
  DegeneratePair,
  Parse,
  Validation,
  NoIntent,
  InvalidMode,
  SessionFinished,
  InvalidDirection,
  Decode,
  Report,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::DegenerateDirection: return "degenerate_direction";
    case ErrorCode::DegeneratePair: return "degenerate_pair";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::NoIntent: return "no_intent";
    case ErrorCode::InvalidMode: return "invalid_mode";
    case ErrorCode::SessionFinished: return "session_finished";
    case ErrorCode::InvalidDirection: return "invalid_direction";
    case ErrorCode::Decode: return "decode";
    case ErrorCode::Report: return "report";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace shared_dof
