#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace colex {

/// Entry point of the `colex` command-line tool. `args` holds the arguments
/// without the program name. Command output is written to `out`, diagnostics
/// to `err`, so the whole tool can be driven in-process.
///
/// Exit codes: 0 success, 2 I/O or parse failure, 3 processing or shape
/// failure, 4 usage error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace colex
