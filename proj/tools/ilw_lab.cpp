#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ilw::cli::run(argc, argv, std::cout, std::cerr); }
