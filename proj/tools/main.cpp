#include <iostream>

#include "lfsim/cli.hpp"

int main(int argc, char** argv) { return lfsim::cli_main(argc, argv, std::cout, std::cerr); }
