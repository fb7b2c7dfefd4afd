#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpv {

// Command-line front end.  Subcommands: verify, lint-policy, lint-arch,
// facts, goals, rules, trace-check.  Exit status: 0 clean, 2 when the run
// surfaced violations, 1 on input or usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpv
