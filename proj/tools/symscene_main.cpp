#include <iostream>
#include <string>
#include <vector>

#include "symscene/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return symscene::cli::run(args, std::cout, std::cerr);
}
