#include <iostream>

#include "faasim/cli.hpp"

int main(int argc, char** argv) { return faasim::cli::run(argc, argv, std::cout, std::cerr); }
