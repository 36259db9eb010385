#pragma once

#include <iosfwd>

namespace mmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

/// Parses the command line and runs one subcommand: validate, run, select,
/// allocate, response, refresh or simulate. Results go to `out`, progress
/// and errors to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmm::cli
