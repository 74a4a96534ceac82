#include <iostream>

#include "spim/cli.hpp"

int main(int argc, char** argv) { return spim::cli::run_cli(argc, argv, std::cout, std::cerr); }
