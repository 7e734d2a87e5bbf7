#include <iostream>

#include "dronerf/cli.hpp"

int main(int argc, char** argv) { return dronerf::run_cli(argc, argv, std::cout, std::cerr); }
