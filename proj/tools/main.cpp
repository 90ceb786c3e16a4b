#include <iostream>
#include <string>
#include <vector>

#include "flr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return flr::cli::run(args, std::cout, std::cerr);
}
