#include <iostream>

#include "gps_cli/commands.hpp"

int main(int argc, char** argv) { return gps::cli::run_cli(argc, argv, std::cout, std::cerr); }
