#include <iostream>

#include "sigmalab/cli.hpp"

int main(int argc, char** argv) { return sigmalab::run_cli(argc, argv, std::cout, std::cerr); }
