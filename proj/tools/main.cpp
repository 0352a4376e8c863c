#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cosyn::cli::run(argc, argv, std::cout, std::cerr); }
