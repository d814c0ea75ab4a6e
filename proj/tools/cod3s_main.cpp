#include <iostream>
#include <string>
#include <vector>

#include "cod3s/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cod3s::cli::dispatch(args, std::cout, std::cerr);
}
