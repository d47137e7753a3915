#include <iostream>

#include "phcollapse/harness.hpp"

int main(int argc, char** argv) { return phc::cli_main(argc, argv, std::cout, std::cerr); }
