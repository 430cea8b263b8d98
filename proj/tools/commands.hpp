#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace singspec::cli {

// Exit codes.
constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1; // a verification ran and reported FAIL
constexpr int exit_validation = 2;   // bad flags, configs or inputs
constexpr int exit_convergence = 3;  // numerical non-convergence

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace singspec::cli
