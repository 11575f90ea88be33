#include <iostream>

#include "qrstab/cli.hpp"

int main(int argc, char** argv)
{
    return qrstab::run_cli(argc, argv, std::cout, std::cerr);
}
