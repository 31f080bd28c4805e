#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crn {

/// Runs the `crn` command line. `args` excludes the program name. Returns the
/// process exit code: 0 success, 1 usage or input error, 2 empty candidate
/// set, 3 cap exceeded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crn
