#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ewm::cli {

/// `log:<start>:<end>:<count>` (geometric, endpoints inclusive, count >= 2) or a
/// comma-separated list. Throws Error{FormatError}.
std::vector<double> parse_alpha_grid(const std::string& token);

/// Runs one subcommand. argv[0] is the program name. Returns 0 on success,
/// 2 on a usage error (bad subcommand, flag, or flag value), 1 on a runtime error.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace ewm::cli
