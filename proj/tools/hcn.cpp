#include <iostream>

#include "hcn/cli/app.hpp"

int main(int argc, char** argv) {
  return hcn::cli::parse_and_dispatch(argc, argv, std::cin, std::cout, std::cerr);
}
