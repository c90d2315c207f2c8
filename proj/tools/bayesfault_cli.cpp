#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return bayesfault::cli::run(argc, argv, std::cout, std::cerr); }
