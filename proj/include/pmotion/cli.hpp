#pragma once
// `pm` command-line front end: synth, train, generate, eval.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace pmotion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace pmotion::cli
