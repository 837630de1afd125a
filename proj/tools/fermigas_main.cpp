#include <iostream>

#include "fermigas/cli.hpp"

int main(int argc, char** argv) { return fermigas::run_cli(argc, argv, std::cout, std::cerr); }
