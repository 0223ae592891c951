#include <iostream>
#include <string>
#include <vector>

#include "parcel_trace/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return parcel::cli::run(args, std::cout, std::cerr);
}
