#include <iostream>

#include "qmb/cli.hpp"

int main(int argc, char** argv) { return qmb::run_cli(argc, argv, std::cout, std::cerr); }
