#pragma once

#include <iosfwd>

namespace bayesfault::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kNumericalFailure = 1;
inline constexpr int kUsageError = 2;

/// Parses argv and dispatches to a subcommand. Messages go to `out` / `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bayesfault::cli
