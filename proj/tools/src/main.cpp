#include <iostream>

#include "gscatter_cli/cli.hpp"

int main(int argc, char** argv) {
  return gscatter::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
