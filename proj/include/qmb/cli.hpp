#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qmb {

/// Exit codes: 0 success, 1 a solver or verification failure, 2 bad input.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmb
