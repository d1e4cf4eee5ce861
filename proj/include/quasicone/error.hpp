#pragma once

#include <stdexcept>
#include <string>

namespace quasicone {

// Broad failure classes; the CLI maps them onto structured error objects.
enum class ErrorCode {
  kInvalidArgument,
  kDegreeMismatch,
  kPrecondition,
  kParse,
  kUnknownName,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDegreeMismatch: return "degree_mismatch";
    case ErrorCode::kPrecondition: return "precondition_failed";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kUnknownName: return "unknown_name";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace quasicone
