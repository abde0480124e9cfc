#include <iostream>
#include <string>
#include <vector>

#include "utb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return utb::run_cli(args, std::cout, std::cerr);
}
