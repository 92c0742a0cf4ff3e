#include <iostream>

#include "pscript/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pscript::run_cli(args, std::cout, std::cerr);
}
