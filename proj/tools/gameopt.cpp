#include <iostream>

#include "gameopt/cli.hpp"

int main(int argc, char** argv) { return gameopt::run_cli(argc, argv, std::cout, std::cerr); }
