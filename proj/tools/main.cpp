#include <iostream>

#include "mvgad/cli.hpp"

int main(int argc, char** argv) {
  return mvgad::cli::run_command({argv + 1, argv + argc}, std::cout, std::cerr);
}
