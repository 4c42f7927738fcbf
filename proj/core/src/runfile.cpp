#include "faitheval/runfile.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "faitheval/errors.hpp"

namespace faitheval {

using nlohmann::json;

namespace {

json item_to_json(const RunItem& item) {
    json votes = json::array();
    for (const auto& vote : item.votes) {
        votes.push_back({
            {"backend_id", vote.backend_id},
            {"raw_output", vote.raw_output},
            {"klass", vote.klass},
            {"invalid", vote.invalid},
            {"parse_ok", vote.parse_ok},
        });
    }
    json out = {
        {"subset", item.subset},
        {"response_id", item.response_id},
        {"source_id", item.source_id},
        {"model", item.model},
        {"prompt_hash", item.prompt_hash},
        {"example_count", item.example_count},
        {"self_included", item.self_included},
        {"klass", item.klass},
        {"invalid", item.invalid},
        {"parse_ok", item.parse_ok},
        {"refusal", item.refusal},
        {"scored", item.scored},
        {"excluded", item.excluded},
        {"error", item.error},
        {"votes", std::move(votes)},
    };
    if (item.gold) out["gold"] = *item.gold;
    if (!item.candidate_text.empty())
        out["candidate_text"] = item.candidate_text;
    return out;
}

RunItem item_from_json(const json& record) {
    RunItem item;
    item.subset = record.value("subset", std::string());
    item.response_id = record.value("response_id", std::string());
    item.source_id = record.value("source_id", std::string());
    item.model = record.value("model", std::string());
    if (record.contains("gold")) item.gold = record["gold"].get<std::string>();
    item.prompt_hash = record.value("prompt_hash", std::string());
    item.example_count = record.value("example_count", std::size_t{0});
    item.self_included = record.value("self_included", false);
    item.klass = record.value("klass", std::string());
    item.invalid = record.value("invalid", false);
    item.parse_ok = record.value("parse_ok", true);
    item.refusal = record.value("refusal", false);
    item.scored = record.value("scored", true);
    item.excluded = record.value("excluded", false);
    item.error = record.value("error", std::string());
    item.candidate_text = record.value("candidate_text", std::string());
    for (const auto& vote_json : record.value("votes", json::array())) {
        VoteRecord vote;
        vote.backend_id = vote_json.value("backend_id", std::string());
        vote.raw_output = vote_json.value("raw_output", std::string());
        vote.klass = vote_json.value("klass", std::string());
        vote.invalid = vote_json.value("invalid", false);
        vote.parse_ok = vote_json.value("parse_ok", true);
        item.votes.push_back(std::move(vote));
    }
    return item;
}

}  // namespace

std::string run_file_to_json(const RunFile& run) {
    std::vector<const RunItem*> ordered;
    ordered.reserve(run.items.size());
    for (const auto& item : run.items) ordered.push_back(&item);
    std::sort(ordered.begin(), ordered.end(),
              [](const RunItem* a, const RunItem* b) {
                  return std::tie(a->subset, a->source_id, a->response_id,
                                  a->model) <
                         std::tie(b->subset, b->source_id, b->response_id,
                                  b->model);
              });
    json items = json::array();
    for (const auto* item : ordered) items.push_back(item_to_json(*item));
    json out = {
        {"schema", run.schema},
        {"command", run.command},
        {"config", run.config},
        {"seed", run.seed},
        {"mode", run.mode},
        {"flavor", run.flavor},
        {"template_version", run.template_version},
        {"template_set_hash", run.template_set_hash},
        {"judge_backends", run.judge_backends},
        {"final", run.final_run},
        {"items", std::move(items)},
    };
    return out.dump(2) + "\n";
}

RunFile run_file_from_json(const std::string& text) {
    json record;
    try {
        record = json::parse(text);
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed run file: ") + e.what());
    }
    RunFile run;
    run.schema = record.value("schema", std::string());
    if (run.schema != "faitheval.run.v1")
        throw UsageError("unsupported run file schema: " + run.schema);
    run.command = record.value("command", std::string());
    if (record.contains("config")) {
        for (const auto& [key, value] : record.at("config").items())
            run.config[key] = value.get<std::string>();
    }
    run.seed = record.value("seed", std::uint64_t{0});
    run.mode = record.value("mode", std::string("binary"));
    run.flavor = record.value("flavor", std::string());
    run.template_version = record.value("template_version", std::string());
    run.template_set_hash = record.value("template_set_hash", std::string());
    for (const auto& backend :
         record.value("judge_backends", json::array()))
        run.judge_backends.push_back(backend.get<std::string>());
    run.final_run = record.value("final", true);
    for (const auto& item_json : record.value("items", json::array()))
        run.items.push_back(item_from_json(item_json));
    return run;
}

void save_run_file(const RunFile& run, const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write run file " + path.string());
    out << run_file_to_json(run);
}

RunFile load_run_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read run file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_file_from_json(buf.str());
}

void replay_verdicts(RunFile& run) {
    const JudgeMode mode = mode_from_name(run.mode);
    for (auto& item : run.items) {
        if (!item.scored || item.votes.empty()) continue;
        std::vector<JudgeVerdict> verdicts;
        for (auto& vote : item.votes) {
            JudgeVerdict verdict = parse_verdict(vote.raw_output, mode);
            vote.klass = std::string(verdict_class_name(verdict.klass));
            vote.invalid = verdict.invalid_response;
            vote.parse_ok = verdict.parse_ok;
            verdicts.push_back(std::move(verdict));
        }
        const JudgeVerdict final_verdict =
            verdicts.size() == 1 ? verdicts.front() : majority_vote(verdicts);
        item.klass = std::string(verdict_class_name(final_verdict.klass));
        item.invalid = final_verdict.invalid_response;
        item.parse_ok = final_verdict.parse_ok;
    }
}

MetricReport metrics_from_run(const RunFile& run, GoldPolicy policy) {
    std::vector<ScoredPair> pairs;
    for (const auto& item : run.items) {
        if (!item.scored || !item.gold) continue;
        pairs.push_back({*item.gold, item.klass, !item.parse_ok});
    }
    if (pairs.empty())
        throw MetricsError("run file has no gold-labeled scored items");
    return score_pairs(pairs, policy);
}

std::vector<LeaderboardEntry> entries_from_run(const RunFile& run) {
    // model -> subset -> tally over scored items only
    std::map<std::string, LeaderboardEntry> entries;
    std::map<std::string, std::map<std::string, SubsetTally>> tallies;
    std::map<std::string, std::size_t> refusals;
    for (const auto& item : run.items) {
        if (item.model.empty()) continue;
        if (!item.scored || item.excluded) continue;
        auto& tally = tallies[item.model][item.subset];
        ++tally.total;
        if (item.klass != "Consistent" || item.invalid)
            ++tally.hallucinated_or_invalid;
        if (item.refusal) ++refusals[item.model];
    }
    std::vector<LeaderboardEntry> out;
    for (auto& [model, per_subset] : tallies) {
        LeaderboardEntry entry;
        entry.model = model;
        entry.per_subset = per_subset;
        entry.refusals = refusals[model];
        out.push_back(std::move(entry));
    }
    return out;
}

JudgeRunSummary summarize_run(const RunFile& run) {
    JudgeRunSummary summary;
    summary.judge_id =
        run.judge_backends.empty() ? "unknown" : run.judge_backends.front();
    for (const auto& item : run.items) {
        if (!item.scored || item.excluded || item.model.empty()) continue;
        if (item.klass != "Consistent" || item.invalid)
            ++summary.totals_by_model[item.model];
        else
            summary.totals_by_model.try_emplace(item.model, 0);
    }
    return summary;
}

}  // namespace faitheval
