#include <iostream>

#include "mummi/cli.hpp"

int main(int argc, char** argv) { return mummi::cli::run(argc, argv, std::cout, std::cerr); }
