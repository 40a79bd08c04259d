#include "lowmach_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lowmach::cli::run_cli(argc, argv, std::cout, std::cerr); }
