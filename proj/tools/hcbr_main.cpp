#include <unistd.h>

#include <cstdlib>
#include <iostream>

#include "hcbr/cli.hpp"

int main(int argc, char** argv) {
  const bool color = std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO) != 0;
  return hcbr::run_cli({argv + 1, argv + argc}, std::cout, std::cerr, color);
}
