#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace goursat2d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitSolve = 2;
inline constexpr int kExitCheck = 3;

/// Subcommands solve, linsolve, verify, sens and mms. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace goursat2d::cli
