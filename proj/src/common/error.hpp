#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lotwatch {

// Every failure surfaced by the core carries one of these codes. The C API
// maps them one-to-one onto lw_status values.
enum class ErrorCode {
  invalid_argument,
  decode,
  io,
  not_found,
  config,
  upstream,
  unreadable,
  internal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lotwatch
