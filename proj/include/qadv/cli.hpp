#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qadv::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAssertion = 2;

/// Runs one subcommand. `args` excludes the program name. The JSON report (or
/// the --table summary) goes to `out`; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qadv::cli
