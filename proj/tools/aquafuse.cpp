#include <iostream>

#include "aquafuse/cli.hpp"

int main(int argc, char** argv) {
  return aquafuse::cli::run(argc, argv, {std::cout, std::cerr});
}
