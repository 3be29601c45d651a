#include <iostream>

#include "blocktri/cli.hpp"

int main(int argc, char** argv) {
  return blocktri::cli::main_entry(argc, argv, std::cout, std::cerr);
}
