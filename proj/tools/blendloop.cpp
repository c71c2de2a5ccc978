#include <iostream>
#include <string>
#include <vector>

#include "blendloop/cli.hpp"

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv, argv + argc);
    return blendloop::cli::run(args, std::cout, std::cerr);
}
