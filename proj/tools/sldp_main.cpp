#include "sldp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sldp::run_cli(argc, argv, std::cout, std::cerr); }
