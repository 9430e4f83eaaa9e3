#include <iostream>
#include <string>
#include <vector>

#include "blechannel/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return blechannel::harness::run_cli(args, std::cout, std::cerr);
}
