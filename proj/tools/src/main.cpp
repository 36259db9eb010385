#include <iostream>

#include "mmm/cli/app.hpp"

int main(int argc, char** argv) { return mmm::cli::run_cli(argc, argv, std::cout, std::cerr); }
