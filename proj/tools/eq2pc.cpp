#include <iostream>

#include "eq2pc/cli.hpp"

int main(int argc, char** argv) { return eq2pc::cli::run(argc, argv, std::cout, std::cerr); }
