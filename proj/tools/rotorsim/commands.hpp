#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace rotorsim {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kBudget = 3 };

/// Parses `args` (args[0] is the program name) and runs the command. Never
/// throws: errors become exit codes, with a JSON error object on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration. Throws on errors.
int run_command(const RunConfig& config, std::ostream& out);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace rotorsim
