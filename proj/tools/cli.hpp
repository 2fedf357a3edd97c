#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crossguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBudget = 1;  // bench below --min-fps
inline constexpr int kExitError = 2;   // usage, parse or constraint error

/// Runs one command line. `args` excludes the program name. Data goes to
/// files (or `out` for eval-seg, calibrate and bench); diagnostics go to
/// `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace crossguard::cli
