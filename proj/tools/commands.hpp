#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ccssp::cli {

enum ExitCode : int { kOk = 0, kInfeasible = 2, kInputError = 3, kNumericalFailure = 4 };

/// Parses and runs one command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccssp::cli
