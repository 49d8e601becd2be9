#include <iostream>
#include <string>
#include <vector>

#include "scalar_att/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scalar_att::cli::run(args, std::cout, std::cerr);
}
