#pragma once

#include <iosfwd>

#include "ecc/error.hpp"

namespace ecc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDegenerate = 4;

int exit_code_for(ErrorKind kind) noexcept;

/// Parses arguments and runs one subcommand (ingest-check, compute, analyze,
/// synth). Never throws; the return value is the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecc::cli
