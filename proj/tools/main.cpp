#include <iostream>
#include <string>
#include <vector>

#include "flamedet/cli_app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return flamedet::run_cli(args, std::cout, std::cerr);
}
