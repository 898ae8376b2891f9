#pragma once

#include <iosfwd>

namespace relpose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInvariant = 3;

// Entry point of the `relpose` tool. Normal output goes to `out`,
// diagnostics to `err`. Returns the process exit code.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relpose::cli
