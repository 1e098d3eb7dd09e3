#include <iostream>
#include <string>
#include <vector>

#include "wsnet/cli.hpp"
#include "wsnet/common.hpp"

int main(int argc, char** argv) {
  wsnet::retain_heap_memory();
  std::vector<std::string> args(argv + 1, argv + argc);
  return wsnet::run_cli(args, std::cout, std::cerr);
}
