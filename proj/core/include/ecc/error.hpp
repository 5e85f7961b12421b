#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ecc {

enum class ErrorKind {
  io,          // file missing or unreadable
  parse,       // malformed input row
  validation,  // well-formed but out-of-contract data
  config,      // invalid configuration or flag combination
  argument,    // precondition on a function argument violated
  degenerate,  // statistic or analysis undefined for this input
  analysis,    // analysis could not run (e.g. empty period)
  internal,    // broken invariant
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace ecc
