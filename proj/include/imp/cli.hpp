#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace imp::cli {

enum ExitCode { ok = 0, failure = 1, usage = 2 };

/// Runs the `imp` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace imp::cli
