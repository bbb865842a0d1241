#include <iostream>

#include "gridcode/cli.hpp"

int main(int argc, char** argv) {
    return gridcode::cli::run_cli(argc, argv, std::cout, std::cerr);
}
