#include <iostream>

#include "qlab/harness/cli.hpp"

int main(int argc, char** argv) {
  return qlab::harness::run_cli(argc, argv, std::cout, std::cerr);
}
