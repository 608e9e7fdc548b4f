#include <iostream>

#include "tcam/cli.hpp"

int main(int argc, char** argv) { return tcam::cli_main(argc, argv, std::cout, std::cerr); }
