#include <iostream>
#include <string>
#include <vector>

#include "tdist/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tdist::run_cli(args, std::cout, std::cerr);
}
