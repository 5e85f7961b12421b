#include "ecc/error.hpp"

namespace ecc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
    case ErrorKind::argument: return "argument";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::analysis: return "analysis";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace ecc
