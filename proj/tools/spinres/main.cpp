#include <spinres_cli/commands.hpp>

#include <iostream>

int main(int argc, char **argv) { return spinres::cli::run_main(argc, argv, std::cout, std::cerr); }
