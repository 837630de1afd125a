#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fermigas {

// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitInvariantFailure = 1,
    kExitConfigError = 2,
    kExitNonConvergence = 3,
    kExitResourceGuard = 4,
};

// Runs one subcommand (ball, rpa, exchange, continuum, oracle, sweep, verify). Tables and reports go
// to the configured output file or `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

// "%.17g"
std::string format_double(double v);

}  // namespace fermigas
