#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "faitheval/backend.hpp"
#include "faitheval/corpus.hpp"

namespace testutil {

inline const bool quiet_logging = [] {
    spdlog::set_level(spdlog::level::err);
    return true;
}();

inline std::filesystem::path fixture_path(const std::string& name) {
    return std::filesystem::path(FAITHEVAL_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng(std::random_device{}());
        dir_ = base / ("faitheval-" + tag + "-" + std::to_string(rng()));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path operator/(const std::string& name) const {
        return dir_ / name;
    }

private:
    std::filesystem::path dir_;
};

/// Script that answers with the target's gold label (binary mapping), read
/// from the prompt metadata. Unannotated targets come back Consistent.
inline faitheval::MockChatClient::Script echo_gold_script(
    const faitheval::DatasetBundle& bundle) {
    return [&bundle](const faitheval::PromptBundle& prompt) -> std::string {
        using faitheval::HallucinationLabel;
        auto it = prompt.meta.find("target_id");
        HallucinationLabel gold = HallucinationLabel::Consistent;
        if (it != prompt.meta.end()) {
            auto response = bundle.responses.find(it->second);
            if (response != bundle.responses.end() &&
                response->second.gold)
                gold = *response->second.gold;
        }
        std::string klass = gold == HallucinationLabel::Consistent
                                ? "Consistent"
                                : "Inconsistent";
        return "Scripted verdict.\nFinal classification: " + klass + "\n";
    };
}

}  // namespace testutil
