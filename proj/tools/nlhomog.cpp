#include <iostream>

#include "nlh/cli.hpp"

int main(int argc, char** argv) { return nlh::run_cli(argc, argv, std::cout, std::cerr); }
