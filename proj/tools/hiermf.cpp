#include <iostream>
#include <string>
#include <vector>

#include "hiermf/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hiermf::cli::run(args, std::cout, std::cerr);
}
