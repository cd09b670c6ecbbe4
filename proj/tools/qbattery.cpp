#include <iostream>

#include "qbattery/cli.hpp"

int main(int argc, char** argv) { return qb::run_cli(argc, argv, std::cout, std::cerr); }
