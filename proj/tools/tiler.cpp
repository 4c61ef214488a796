#include <iostream>

#include "tiler/cli.hpp"

int main(int argc, char** argv) { return tiler::cli_main(argc, argv, std::cout, std::cerr); }
