#include <iostream>

#include "cece/cli.hpp"

int main(int argc, char** argv) { return cece::run_cli(argc, argv, std::cout, std::cerr); }
