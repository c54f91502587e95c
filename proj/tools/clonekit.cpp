#include <cstdlib>
#include <iostream>

#include "clonekit/cli.hpp"

int main(int argc, char** argv) {
  const char* caps = std::getenv("CLONEKIT_CAPS");
  auto r = clonekit::run_cli(std::vector<std::string>(argv + 1, argv + argc), caps ? caps : "");
  std::cout << r.out;
  std::cerr << r.err;
  return r.exit_code;
}
