#include <iostream>

#include "pedintent/commands.hpp"

int main(int argc, char** argv) { return pedintent::run_cli(argc, argv, std::cout, std::cerr); }
