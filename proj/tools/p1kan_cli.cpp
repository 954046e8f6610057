#include <iostream>
#include <string>
#include <vector>

#include "p1kan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return p1kan::run_cli(args, std::cout, std::cerr);
}
