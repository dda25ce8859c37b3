#pragma once

#include <string>
#include <vector>

namespace ionfringe {

// Entry point shared by the binary and in-process tests. Returns the exit
// code: 0 success, 2 invalid input, 3 solver non-convergence.
int run_cli(const std::vector<std::string>& args);

}  // namespace ionfringe
