#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wavems::cli {

/// Runs the `wavems` command line. args excludes the program name.
/// Exit status: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wavems::cli
