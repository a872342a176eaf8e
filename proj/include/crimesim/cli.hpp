#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crimesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRuntime = 3;

/// Runs one `crimesim` invocation; `args` excludes the program name.
/// Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crimesim::cli
