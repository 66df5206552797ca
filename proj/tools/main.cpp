#include <iostream>

#include "fxcast/cli/commands.hpp"

int main(int argc, char** argv) { return fxcast::cli::run(argc, argv, std::cout, std::cerr); }
