#include <iostream>

#include "morse/cli.hpp"

int main(int argc, char** argv) { return morse::cli::run(argc, argv, std::cout, std::cerr); }
