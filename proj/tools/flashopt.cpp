#include <iostream>
#include <string>
#include <vector>

#include "flashopt/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return flashopt::cli::run(args, std::cout, std::cerr, std::cin);
}
