#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faitheval/backend.hpp"
#include "faitheval/cache.hpp"
#include "faitheval/corpus.hpp"
#include "faitheval/judge.hpp"

namespace faitheval {

struct SubsetTally {
    std::size_t hallucinated_or_invalid = 0;
    std::size_t total = 0;
};

struct LeaderboardEntry {
    std::string model;
    std::map<std::string, SubsetTally> per_subset;  // subset id -> tally
    std::size_t refusals = 0;
    double overall_rate = 0;  // percent, raw (pooled counts)
    std::size_t rank = 0;     // 1-based, contiguous

    std::size_t hallucinated_total() const;
    std::size_t response_total() const;
};

/// External hallucination detector. Reachable over HTTP
/// (POST {context, response} -> {score}) or as a subprocess that reads the
/// same JSON records line by line on stdin and answers on stdout. Scores
/// are consistency scores in [0, 1].
struct DetectorSpec {
    std::string id;
    std::string endpoint;              // http(s) URL, or empty
    std::vector<std::string> command;  // subprocess argv, or empty
    double threshold = 0.5;
};

struct GenerationRecord {
    std::string source_id;
    std::string model;
    std::string response_id;
    std::string text;
    bool ok = true;
    std::string error;
    bool refusal = false;
    std::string prompt_hash;
};

/// Generates one candidate response per source. Backend failures are
/// recorded per source and the run continues; raw outputs are returned for
/// persistence before any scoring happens.
std::vector<GenerationRecord> generate_candidates(
    ChatClient& client, const std::vector<const SourceDocument*>& sources,
    DiskCache* cache = nullptr,
    const TemplateSet& templates = TemplateSet::builtin());

/// Refusal rule: at most five whitespace-delimited words.
bool detect_refusal(std::string_view text);

struct CandidateScore {
    std::string source_id;
    std::string response_id;
    std::string model;
    bool refusal = false;
    bool scored = true;  // false when the judge call failed
    std::string error;
    bool hallucinated = false;
    bool invalid = false;
    bool parse_ok = true;
    std::string klass;
    std::string raw;
    std::string prompt_hash;
    std::size_t example_count = 0;

    bool hallucinated_or_invalid() const { return hallucinated || invalid; }
};

/// Judges one candidate per subset source with every annotated response of
/// that source as an example (leaderboard mode: the judge may flag invalid
/// responses, which count as hallucinated). Judge failures leave the
/// response unscored and reported.
std::vector<CandidateScore> score_subset_with_judge(
    const std::vector<SubsetSource>& subset,
    const std::map<std::string, GenerationRecord>& candidates_by_source,
    ChatClient& client, DiskCache* cache = nullptr,
    const TemplateSet& templates = TemplateSet::builtin());

struct DetectorFlag {
    double score = 0;
    bool hallucinated = false;  // score strictly below the threshold
};

/// Scores (context, response) pairs with an external detector. Protocol
/// errors abort with diagnostics. Callers exclude refusals before building
/// the pair list, so a refusal never reaches the detector.
std::vector<DetectorFlag> score_with_detector(
    const DetectorSpec& detector,
    const std::vector<std::pair<std::string, std::string>>& pairs);

/// Computes overall rates and assigns contiguous 1-based ranks, ascending
/// by rate with name-ascending tie-break. All entries must cover the same
/// subset ids.
std::vector<LeaderboardEntry> build_leaderboard(
    std::vector<LeaderboardEntry> entries);

struct JudgeRunSummary {
    std::string judge_id;
    std::map<std::string, std::size_t> totals_by_model;
};

struct CrossJudgeCell {
    std::size_t total = 0;
    std::size_t rank = 0;
    bool self_judgment = false;
};

struct CrossJudgeReport {
    std::vector<std::string> judges;
    std::vector<std::string> models;
    // cells[judge][model]
    std::map<std::string, std::map<std::string, CrossJudgeCell>> cells;
};

/// Per-judge hallucinated-response totals and rankings, flagging cells
/// where a judge scores its own generations. Needs at least two judges.
CrossJudgeReport cross_judge_report(
    const std::vector<JudgeRunSummary>& runs);

}  // namespace faitheval
