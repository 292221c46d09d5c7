#include <iostream>

#include "wavefield/cli.hpp"

int main(int argc, char** argv) { return wavefield::cli_main(argc, argv, std::cout, std::cerr); }
