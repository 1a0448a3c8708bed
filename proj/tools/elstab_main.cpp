#include <iostream>
#include <string>
#include <vector>

#include "elstab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return elstab::run_cli(args, std::cout, std::cerr);
}
