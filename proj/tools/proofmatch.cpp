#include <iostream>

#include "proofmatch/cli.hpp"

int main(int argc, char** argv) {
  return proofmatch::run(argc, argv, std::cout, std::cerr);
}
