#include <iostream>

#include "batchq/cli.hpp"

int main(int argc, char** argv) { return batchq::run_cli(argc, argv, std::cout, std::cerr); }
