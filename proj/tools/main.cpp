#include <iostream>
#include <string>
#include <vector>

#include "imp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return imp::cli::run(args, std::cout, std::cerr);
}
