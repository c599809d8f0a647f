#include "ergolab/runner.hpp"

#include <iostream>

int main(int argc, char** argv) { return ergolab::run_cli(argc, argv, std::cout, std::cerr); }
