#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmrl {

// Runs one CLI invocation. `args` excludes the program name. Returns the
// process exit code: 0 on success, 1 on data errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmrl
