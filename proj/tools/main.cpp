#include <string>
#include <vector>

#include "ionfringe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ionfringe::run_cli(args);
}
