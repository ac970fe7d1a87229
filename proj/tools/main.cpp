#include "xcoupler/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return xcoupler::cli::run(argc, argv, std::cout, std::cerr);
}
