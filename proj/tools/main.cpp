#include <iostream>

#include "sqgw/cli.hpp"

int main(int argc, char** argv) { return sqgw::run_command(argc, argv, std::cout, std::cerr); }
