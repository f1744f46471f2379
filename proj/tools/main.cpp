#include <iostream>
#include <string>
#include <vector>

#include "chaosbound/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return chaosbound::cli::run(args, std::cout, std::cerr);
}
