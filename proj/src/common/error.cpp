#include "common/error.hpp"

namespace lotwatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::decode: return "decode";
    case ErrorCode::io: return "io";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::config: return "config";
    case ErrorCode::upstream: return "upstream";
    case ErrorCode::unreadable: return "unreadable";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace lotwatch
