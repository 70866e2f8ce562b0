#include <string>
#include <vector>

#include "deepmrc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return deepmrc::run_cli(args);
}
