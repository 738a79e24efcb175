#include <iostream>

#include "hdmf_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hdmf::cli::run(args, std::cout, std::cerr);
}
