#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cod3s::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `cod3s` invocation. args[0] is the program name. Results go to
/// the files named by flags, or to `out` when a command's -o is omitted;
/// diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace cod3s::cli
