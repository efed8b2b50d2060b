#include "tsearch/errors.hpp"

namespace tsearch {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::empty_pool: return "empty_pool";
    case ErrorCode::empty_index: return "empty_index";
    case ErrorCode::shape: return "shape";
    case ErrorCode::backend: return "backend";
    case ErrorCode::missing_script: return "missing_script";
    case ErrorCode::initialization: return "initialization";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::aborted: return "aborted";
  }
  return "unknown";
}

}  // namespace tsearch
