#include <iostream>

#include "utrad/cli/run.hpp"

int main(int argc, char** argv) {
  return utrad::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
