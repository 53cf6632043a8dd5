#pragma once

#include <stdexcept>
#include <string>

namespace ocular {

enum class ErrorCode {
  bounds,
  scale,
  size,
  domain,
  parameter,
  input,
  rank,
  numerical,
  constraint,
  state,
  io,
  format,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers can tell a bad argument from a numerical breakdown.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + " error: " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ocular
