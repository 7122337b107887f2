#include <iostream>
#include <string>
#include <vector>

#include "psamp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return psamp::run_cli(args, std::cout, std::cerr);
}
