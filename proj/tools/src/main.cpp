#include <iostream>
#include <string>
#include <vector>

#include "wlogit_cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wlogit::cli::run_command(args, std::cout, std::cerr);
}
