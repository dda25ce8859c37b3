#pragma once

#include <stdexcept>
#include <string>

namespace ionfringe {

// Bad user input: malformed config or scan files, out-of-range arguments.
// The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative solver failed to reach its tolerance. Exit code 3.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ionfringe
