#include <iostream>
#include <string>
#include <vector>

#include "freqformer/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return freqformer::run_cli(args, std::cout, std::cerr);
}
