#pragma once

#include <ostream>

namespace hallsand::cli {

/// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kEngineError = 2;

/// Runs the command line; returns the exit code. All normal output goes to
/// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hallsand::cli
