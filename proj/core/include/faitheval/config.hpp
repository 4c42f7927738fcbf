#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faitheval/backend.hpp"
#include "faitheval/corpus.hpp"
#include "faitheval/leaderboard.hpp"
#include "faitheval/promptkit.hpp"

namespace faitheval {

struct DatasetRef {
    std::string id;  // subset id in reports and run files
    std::filesystem::path path;
    DatasetFormat format = DatasetFormat::NativeJsonl;
    TaskKind task = TaskKind::Summarization;
};

/// Fully parsed run configuration. `raw` preserves the exact key=value
/// pairs (secrets unexpanded) so run files can embed the config that
/// produced them.
struct RunConfig {
    std::map<std::string, std::string> raw;
    /// Directory of the config file; relative dataset/candidate paths
    /// resolve against it.
    std::filesystem::path base_dir = ".";

    std::vector<DatasetRef> datasets;       // config order
    std::vector<BackendSpec> judges;        // config order
    std::vector<BackendSpec> candidates;    // models being ranked
    std::optional<DetectorSpec> detector;

    JudgeMode mode = JudgeMode::Binary;
    std::string flavor = "annotated";  // annotated | facts_json |
                                       // chain_of_thought | claims
    std::string scorer = "judge";      // judge | detector (leaderboard flow)
    std::size_t max_examples = kAllExamples;
    std::vector<std::size_t> sweep_ks;
    std::filesystem::path cache_dir = ".faitheval-cache";
    std::filesystem::path out_dir = "out";
    std::optional<std::filesystem::path> template_dir;
    std::uint64_t seed = 0;
    std::size_t subset_cap = 150;
};

/// Parses the key=value config format: one `key = value` pair per line,
/// `#` comments, `${VAR}` environment interpolation (intended for secrets;
/// the raw text is what run files snapshot). Throws ConfigError.
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin);

RunConfig parse_config_file(const std::filesystem::path& path);

/// `${VAR}` expansion against the process environment; unknown variables
/// expand to the empty string.
std::string interpolate_env(const std::string& value);

}  // namespace faitheval
