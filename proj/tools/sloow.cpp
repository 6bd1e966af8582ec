#include <iostream>

#include "sloow/cli.hpp"

int main(int argc, char** argv) {
  return sloow::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
