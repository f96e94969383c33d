#include "bloch2q/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return bloch2q::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
