#include <iostream>

#include "lgq/cli.hpp"

int main(int argc, char** argv) { return lgq::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
