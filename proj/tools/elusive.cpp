#include "elusive/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return elusive::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
