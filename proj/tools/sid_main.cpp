#include <iostream>

#include "sid/cli.hpp"

int main(int argc, char** argv) { return sid::cli::run(argc, argv, std::cout, std::cerr); }
