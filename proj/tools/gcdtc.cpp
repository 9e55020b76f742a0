#include <string>
#include <vector>

#include "gcdtc/pipeline/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gcdtc::pipeline::run_cli(std::move(args));
}
