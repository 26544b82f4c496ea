#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nodalheat::cli {

enum ExitCode : int { kExitSuccess = 0, kExitValidation = 1, kExitSolver = 2 };

/// Parses args (without the program name) and runs one subcommand:
/// stationary, spectrum, liouville, energy, signtest, evolve, scan,
/// asymptotics or verify. The JSON summary goes to out and to
/// <out_dir>/<command>_summary.json, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nodalheat::cli
