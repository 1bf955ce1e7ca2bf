#pragma once

#include <iosfwd>

namespace multivar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Entry point of the `multivar` tool: simulate | fit | benchmark | report.
/// Returns the process exit code; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace multivar::cli
