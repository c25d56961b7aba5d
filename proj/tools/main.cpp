#include <iostream>
#include <string>
#include <vector>

#include "qadv/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qadv::cli::dispatch(args, std::cout, std::cerr);
}
