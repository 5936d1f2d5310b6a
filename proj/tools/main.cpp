#include <iostream>

#include "ppscert/cli.hpp"

int main(int argc, char** argv) { return ppscert::run_cli(argc, argv, std::cout, std::cerr); }
