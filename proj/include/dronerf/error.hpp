#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dronerf {

enum class ErrorCode {
  Io,
  MalformedRecording,
  Parse,
  Schema,
  InvalidArgument,
  InsufficientData,
  InvalidSample,
  EmptyInput,
  InsufficientNoise,
  CannotRaiseSnr,
  NoData,
  InsufficientBursts,
  InsufficientEvents,
  AnomalousFingerprint,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the toolkit carries a code so callers (and the CLI
// exit-code mapping) can branch without parsing messages.
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

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace dronerf
