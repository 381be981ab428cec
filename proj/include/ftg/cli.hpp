#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ftg {

enum ExitCode : int { exit_ok = 0, exit_no_result = 1, exit_input_error = 2, exit_usage = 3 };

/// Runs the `ftg` command line (arguments without the program name).
/// `err_is_tty` feeds the FTG_COLOR=auto decision.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool err_is_tty = false);

}  // namespace ftg
