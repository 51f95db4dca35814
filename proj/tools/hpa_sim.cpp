#include <iostream>

#include "hpa/cli.hpp"

int main(int argc, char** argv) {
  return hpa::run_cli(argc, argv, std::cout, std::cerr);
}
