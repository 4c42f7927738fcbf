#pragma once

#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "faitheval/backend.hpp"

namespace faitheval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCorpus = 3;
inline constexpr int kExitBackend = 4;
inline constexpr int kExitCoverage = 5;

/// Creates the chat client for one configured backend. Tests inject
/// scripted clients here; the default builds HTTP clients, and --mock
/// swaps in deterministic gold-echo mocks.
using ClientFactory =
    std::function<std::unique_ptr<ChatClient>(const BackendSpec&)>;

/// Entry point behind the faitheval binary. `args` excludes argv[0].
int run(const std::vector<std::string>& args,
        const ClientFactory& factory = {}, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace faitheval::cli
