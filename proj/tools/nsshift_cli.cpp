#include <vector>

#include "nsshift/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nsshift::cli::run(args);
}
