#include <iostream>

#include "ppreg/cli.hpp"

int main(int argc, char** argv) { return ppreg::run_cli(argc, argv, std::cout, std::cerr); }
