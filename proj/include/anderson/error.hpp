#pragma once

#include <stdexcept>
#include <string>

namespace anderson {

enum class ErrorCode {
  InvalidArgument = 1,
  Domain,       // degenerate or invalid geometry
  Range,        // request outside a certified/tabulated range
  Io,
  Schema,       // malformed config or CSV
  Numeric,      // non-finite result, root finder failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what,
                    ErrorCode code = ErrorCode::InvalidArgument) {
  if (!cond) fail(code, what);
}

// Non-fatal diagnostics (resolution-rule violations and similar). The default
// sink writes to stderr; the C API lets callers replace it.
using WarningSink = void (*)(const char* message, void* user);
void set_warning_sink(WarningSink sink, void* user);
void warn(const std::string& message);

}  // namespace anderson
