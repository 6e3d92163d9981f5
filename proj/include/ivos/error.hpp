#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ivos {

enum class ErrorCode {
  invalid_argument,
  size_mismatch,
  io,
  format,
  auth,
  not_found,
  phase,
  quota,
  busy,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code lets the service map
// failures onto distinct wire error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ivos
