#include <vector>

#include <spdlog/spdlog.h>

#include "faitheval/cli.hpp"

int main(int argc, char** argv) {
    if (const char* level = std::getenv("FAITHEVAL_LOG_LEVEL"))
        spdlog::set_level(spdlog::level::from_str(level));
    else
        spdlog::set_level(spdlog::level::warn);
    std::vector<std::string> args(argv + 1, argv + argc);
    return faitheval::cli::run(args);
}
