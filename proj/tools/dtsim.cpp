#include <iostream>

#include "dtsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dtsim::run_cli(args, std::cout, std::cerr);
}
