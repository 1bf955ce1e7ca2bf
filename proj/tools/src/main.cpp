#include "multivar_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return multivar::cli::run(argc, argv, std::cout, std::cerr); }
