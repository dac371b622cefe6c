#include "dipmem/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dipmem::cli_main(argc, argv, std::cout, std::cerr); }
