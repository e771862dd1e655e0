#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ostrovsky::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPrecondition = 1;
inline constexpr int kExitNumerical = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "OSTROVSKY_OUT_DIR";

/// Runs the command line (args[0] is the program name) and returns the exit
/// code. Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ostrovsky::cli
