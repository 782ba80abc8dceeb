#include <iostream>

#include "linea/cli.hpp"

int main(int argc, char** argv) {
  return linea::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
