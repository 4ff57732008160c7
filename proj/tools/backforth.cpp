#include <iostream>

#include "backforth/cli.hpp"

int main(int argc, char** argv) { return backforth::cli::run(argc, argv, std::cout, std::cerr); }
