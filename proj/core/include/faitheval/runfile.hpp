#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faitheval/leaderboard.hpp"
#include "faitheval/metrics.hpp"

namespace faitheval {

/// One judge member's raw output for an item (ensembles hold several).
struct VoteRecord {
    std::string backend_id;
    std::string raw_output;
    std::string klass;
    bool invalid = false;
    bool parse_ok = true;
};

struct RunItem {
    std::string subset;       // dataset/subset id
    std::string response_id;  // judged response (annotated or candidate)
    std::string source_id;
    std::string model;        // generator of the judged response
    std::optional<std::string> gold;  // gold label name, absent for candidates
    std::string prompt_hash;
    std::size_t example_count = 0;
    bool self_included = false;
    std::string klass;  // final verdict class
    bool invalid = false;
    bool parse_ok = true;
    bool refusal = false;
    bool scored = true;
    /// Refusals in the detector flow stay out of both the numerator and the
    /// denominator; excluded items do not count against coverage either.
    bool excluded = false;
    std::string error;
    std::string candidate_text;  // persisted generation, when applicable
    std::vector<VoteRecord> votes;
};

/// The canonical machine-readable record of a run: config snapshot, one
/// entry per judged response with raw outputs, and the coverage stamp.
/// Everything human-readable is rendered from this file, and re-running
/// with an identical config reproduces it byte for byte (cache-hit state is
/// deliberately not recorded here).
struct RunFile {
    std::string schema = "faitheval.run.v1";
    std::string command;  // judge | leaderboard | sweep
    std::map<std::string, std::string> config;  // raw key=value snapshot
    std::uint64_t seed = 0;
    std::string mode;
    std::string flavor;
    std::string template_version;
    std::string template_set_hash;
    std::vector<std::string> judge_backends;
    bool final_run = true;  // false when coverage < 100%
    std::vector<RunItem> items;
};

std::string run_file_to_json(const RunFile& run);
RunFile run_file_from_json(const std::string& text);

void save_run_file(const RunFile& run, const std::filesystem::path& path);
RunFile load_run_file(const std::filesystem::path& path);

/// Re-parses every stored raw output (no backend calls) and rebuilds the
/// final verdict fields; the replay path of the pipeline.
void replay_verdicts(RunFile& run);

/// Metric report over the run's gold-labeled items.
MetricReport metrics_from_run(const RunFile& run,
                              GoldPolicy policy = GoldPolicy::StrictBinary);

/// Leaderboard entries tallied from a leaderboard run file. Unscored items
/// are excluded from both numerator and denominator.
std::vector<LeaderboardEntry> entries_from_run(const RunFile& run);

/// Judge-level summary (total hallucinated-or-invalid per evaluated model)
/// for cross-judge comparisons.
JudgeRunSummary summarize_run(const RunFile& run);

}  // namespace faitheval
