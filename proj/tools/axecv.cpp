#include <iostream>

#include "axecv/cli.hpp"

int main(int argc, char** argv) { return axecv::run_cli(argc, argv, std::cout, std::cerr); }
