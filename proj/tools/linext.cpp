#include <iostream>

#include "linext/cli/cli.hpp"
#include "linext/core/alloc.hpp"

int main(int argc, char** argv) {
  linext::keep_freed_memory();
  return linext::cli::run_cli(argc, argv, std::cout, std::cerr);
}
