#include <iostream>

#include "pmdata/commands.hpp"

int main(int argc, char** argv) { return pmdata::cli::run(argc, argv, std::cout, std::cerr); }
