#include <iostream>

#include "pwfield/cli.hpp"

int main(int argc, char** argv) { return pwf::cli::run(argc, argv, std::cout, std::cerr); }
