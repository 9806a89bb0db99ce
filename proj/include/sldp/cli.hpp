#pragma once

#include <ostream>

namespace sldp {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;

/// Exit codes of the command line tool.
enum ExitCode : int { exit_pass = 0, exit_gate_failure = 1, exit_input_error = 2, exit_no_convergence = 3 };

/// Entry point of the `sldp` tool, callable in-process.
/// Verbs: validate | zvonkin | simulate | rate | ldp | verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sldp
