#pragma once

#include <stdexcept>
#include <string>

namespace tsearch {

enum class ErrorCode {
  invalid_argument,
  not_found,
  empty_pool,
  empty_index,
  shape,
  backend,
  missing_script,
  initialization,
  config,
  io,
  parse,
  aborted,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by backend clients. `retryable` separates transport hiccups from
// contract violations (bad payloads, strict-script misses).
class BackendError : public Error {
 public:
  BackendError(const std::string& message, bool retryable, int attempts = 1,
               ErrorCode code = ErrorCode::backend)
      : Error(code, message), retryable_(retryable), attempts_(attempts) {}

  bool retryable() const noexcept { return retryable_; }
  int attempts() const noexcept { return attempts_; }

 private:
  bool retryable_;
  int attempts_;
};

}  // namespace tsearch
