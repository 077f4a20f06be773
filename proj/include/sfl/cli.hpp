#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace sfl::cli {

enum ExitCode : int { ok = 0, config_error = 1, infeasible = 2, numerical_failure = 3 };

// Entry point shared by the sflctl binary and the tests. args excludes the
// program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace sfl::cli
