#include <iostream>

#include <melt/cli.hpp>

int main(int argc, char** argv) {
    return melt::cli::run(argc, argv, std::cout, std::cerr);
}
