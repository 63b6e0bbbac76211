#include <iostream>

#include "bandit/cli.hpp"

int main(int argc, char** argv) { return bandit::cli::run(argc, argv, std::cout, std::cerr); }
