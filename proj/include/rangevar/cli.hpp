#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rangevar::cli {

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsage = 2;

/// Runs one subcommand. args excludes the program name. Human-readable
/// summaries go to `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace rangevar::cli
