#include "faitheval/leaderboard.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faitheval/concurrency.hpp"
#include "faitheval/text.hpp"

namespace faitheval {

using nlohmann::json;

std::size_t LeaderboardEntry::hallucinated_total() const {
    std::size_t total = 0;
    for (const auto& [subset, tally] : per_subset)
        total += tally.hallucinated_or_invalid;
    return total;
}

std::size_t LeaderboardEntry::response_total() const {
    std::size_t total = 0;
    for (const auto& [subset, tally] : per_subset) total += tally.total;
    return total;
}

bool detect_refusal(std::string_view text) {
    return word_count(text) <= 5;
}

std::vector<GenerationRecord> generate_candidates(
    ChatClient& client, const std::vector<const SourceDocument*>& sources,
    DiskCache* cache, const TemplateSet& templates) {
    const std::string model = client.spec().model_name;
    auto results = parallel_map<GenerationRecord>(
        sources.size(), client.spec().max_parallel,
        [&](std::size_t i) -> GenerationRecord {
            const auto& source = *sources[i];
            GenerationRecord record;
            record.source_id = source.id;
            record.model = model;
            record.response_id = source.id + "::cand::" + model;
            auto bundle = build_generation_prompt(source, templates);
            record.prompt_hash = bundle.content_hash;
            record.text = complete(client, bundle, cache);
            record.refusal = detect_refusal(record.text);
            return record;
        });
    std::vector<GenerationRecord> records;
    records.reserve(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        if (results[i].ok()) {
            records.push_back(std::move(*results[i].value));
        } else {
            GenerationRecord failed;
            failed.source_id = sources[i]->id;
            failed.model = model;
            failed.response_id = sources[i]->id + "::cand::" + model;
            failed.ok = false;
            failed.error = results[i].error;
            records.push_back(std::move(failed));
            spdlog::warn("generation failed for source '{}': {}",
                         sources[i]->id, results[i].error);
        }
    }
    return records;
}

std::vector<CandidateScore> score_subset_with_judge(
    const std::vector<SubsetSource>& subset,
    const std::map<std::string, GenerationRecord>& candidates_by_source,
    ChatClient& client, DiskCache* cache, const TemplateSet& templates) {
    std::vector<const SubsetSource*> work;
    for (const auto& entry : subset) work.push_back(&entry);

    auto results = parallel_map<CandidateScore>(
        work.size(), client.spec().max_parallel,
        [&](std::size_t i) -> CandidateScore {
            const auto& entry = *work[i];
            CandidateScore score;
            score.source_id = entry.source->id;
            auto it = candidates_by_source.find(entry.source->id);
            if (it == candidates_by_source.end() || !it->second.ok) {
                score.scored = false;
                score.error = it == candidates_by_source.end()
                                  ? "no candidate generated"
                                  : it->second.error;
                return score;
            }
            const auto& candidate = it->second;
            score.response_id = candidate.response_id;
            score.model = candidate.model;
            score.refusal = candidate.refusal;

            AnnotatedResponse target;
            target.id = candidate.response_id;
            target.source_id = entry.source->id;
            target.generator = candidate.model;
            target.text = candidate.text;

            AnnotatedPromptOptions options;
            options.mode = JudgeMode::Binary;
            options.leaderboard_mode = true;
            JudgeOutcome outcome =
                judge_response(target, entry.responses, *entry.source, client,
                               options, cache, templates);
            score.klass =
                std::string(verdict_class_name(outcome.verdict.klass));
            score.hallucinated =
                outcome.verdict.klass != VerdictClass::Consistent;
            score.invalid = outcome.verdict.invalid_response;
            score.parse_ok = outcome.verdict.parse_ok;
            score.raw = outcome.verdict.raw;
            score.prompt_hash = outcome.prompt_hash;
            score.example_count = outcome.example_count;
            return score;
        });

    std::vector<CandidateScore> scores;
    scores.reserve(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (results[i].ok()) {
            scores.push_back(std::move(*results[i].value));
        } else {
            CandidateScore failed;
            failed.source_id = work[i]->source->id;
            failed.scored = false;
            failed.error = results[i].error;
            auto it = candidates_by_source.find(failed.source_id);
            if (it != candidates_by_source.end()) {
                failed.response_id = it->second.response_id;
                failed.model = it->second.model;
                failed.refusal = it->second.refusal;
            }
            scores.push_back(std::move(failed));
            spdlog::warn("judging failed for source '{}': {}",
                         work[i]->source->id, results[i].error);
        }
    }
    return scores;
}

namespace {

std::vector<double> detect_over_http(
    const DetectorSpec& detector,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)",
                                   std::regex::icase);
    std::smatch match;
    if (!std::regex_match(detector.endpoint, match, url_re))
        throw DetectorError("detector '" + detector.id +
                            "': cannot parse endpoint " + detector.endpoint);
    httplib::Client client(match[1].str());
    std::string path = match[2].matched ? match[2].str() : "/score";
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const auto& [context, response] : pairs) {
        json body = {{"context", context}, {"response", response}};
        auto result = client.Post(path, body.dump(), "application/json");
        if (!result || result->status != 200)
            throw DetectorError(
                "detector '" + detector.id + "': request failed (" +
                (result ? "HTTP " + std::to_string(result->status)
                        : httplib::to_string(result.error())) +
                ")");
        try {
            scores.push_back(json::parse(result->body).at("score")
                                 .get<double>());
        } catch (const json::exception& e) {
            throw DetectorError("detector '" + detector.id +
                                "': malformed score response: " + e.what());
        }
    }
    return scores;
}

std::vector<double> detect_over_subprocess(
    const DetectorSpec& detector,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::string input;
    for (const auto& [context, response] : pairs) {
        json record = {{"context", context}, {"response", response}};
        input += record.dump();
        input += "\n";
    }

    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw DetectorError("detector '" + detector.id +
                            "': failed to create pipes");
    pid_t pid = fork();
    if (pid < 0) throw DetectorError("detector '" + detector.id +
                                     "': fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> argv;
        for (const auto& arg : detector.command)
            argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    // writer thread keeps the child from deadlocking on a full stdout pipe
    std::thread writer([&] {
        std::size_t offset = 0;
        while (offset < input.size()) {
            ssize_t n = write(in_pipe[1], input.data() + offset,
                              input.size() - offset);
            if (n <= 0) break;
            offset += static_cast<std::size_t>(n);
        }
        close(in_pipe[1]);
    });

    std::string output;
    char buf[4096];
    ssize_t n;
    while ((n = read(out_pipe[0], buf, sizeof(buf))) > 0)
        output.append(buf, static_cast<std::size_t>(n));
    close(out_pipe[0]);
    writer.join();

    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw DetectorError("detector '" + detector.id +
                            "': subprocess exited with status " +
                            std::to_string(WIFEXITED(status)
                                               ? WEXITSTATUS(status)
                                               : -1));

    std::vector<double> scores;
    for (const auto& line : split_lines(output)) {
        if (trim(line).empty()) continue;
        try {
            scores.push_back(json::parse(line).at("score").get<double>());
        } catch (const json::exception& e) {
            throw DetectorError("detector '" + detector.id +
                                "': malformed output line: " + e.what());
        }
    }
    if (scores.size() != pairs.size())
        throw DetectorError("detector '" + detector.id + "': expected " +
                            std::to_string(pairs.size()) + " scores, got " +
                            std::to_string(scores.size()));
    return scores;
}

}  // namespace

std::vector<DetectorFlag> score_with_detector(
    const DetectorSpec& detector,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    if (detector.threshold < 0.0 || detector.threshold > 1.0)
        throw DetectorError("detector '" + detector.id +
                            "': threshold outside [0, 1]");
    std::vector<double> scores;
    if (!detector.endpoint.empty()) {
        scores = detect_over_http(detector, pairs);
    } else if (!detector.command.empty()) {
        scores = detect_over_subprocess(detector, pairs);
    } else {
        throw DetectorError("detector '" + detector.id +
                            "': neither endpoint nor command configured");
    }
    std::vector<DetectorFlag> flags;
    flags.reserve(scores.size());
    for (double score : scores) {
        // strict inequality: exactly-at-threshold is not hallucinated
        flags.push_back({score, score < detector.threshold});
    }
    return flags;
}

std::vector<LeaderboardEntry> build_leaderboard(
    std::vector<LeaderboardEntry> entries) {
    if (entries.empty())
        throw UsageError("leaderboard needs at least one entry");
    const auto& reference = entries.front().per_subset;
    for (const auto& entry : entries) {
        if (entry.per_subset.size() != reference.size())
            throw UsageError("entry '" + entry.model +
                             "' covers a different subset list");
        for (const auto& [subset, tally] : entry.per_subset) {
            if (!reference.count(subset))
                throw UsageError("entry '" + entry.model +
                                 "' covers unknown subset '" + subset + "'");
        }
    }
    for (auto& entry : entries) {
        std::size_t total = entry.response_total();
        if (total == 0)
            throw UsageError("entry '" + entry.model +
                             "' has zero scored responses");
        entry.overall_rate = 100.0 *
                             static_cast<double>(entry.hallucinated_total()) /
                             static_cast<double>(total);
    }
    std::sort(entries.begin(), entries.end(),
              [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
                  // ties order by model name ascending
                  return std::tie(a.overall_rate, a.model) <
                         std::tie(b.overall_rate, b.model);
              });
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
    return entries;
}

CrossJudgeReport cross_judge_report(
    const std::vector<JudgeRunSummary>& runs) {
    if (runs.size() < 2)
        throw UsageError("cross-judge comparison needs at least two judges");
    CrossJudgeReport report;
    std::vector<std::string> models;
    for (const auto& run : runs) {
        report.judges.push_back(run.judge_id);
        for (const auto& [model, total] : run.totals_by_model) {
            if (std::find(models.begin(), models.end(), model) ==
                models.end())
                models.push_back(model);
        }
    }
    std::sort(models.begin(), models.end());
    report.models = models;

    for (const auto& run : runs) {
        std::vector<std::pair<std::size_t, std::string>> order;
        for (const auto& model : models) {
            auto it = run.totals_by_model.find(model);
            std::size_t total =
                it == run.totals_by_model.end() ? 0 : it->second;
            order.emplace_back(total, model);
        }
        std::sort(order.begin(), order.end());
        std::map<std::string, std::size_t> rank_of;
        for (std::size_t i = 0; i < order.size(); ++i)
            rank_of[order[i].second] = i + 1;
        for (const auto& model : models) {
            CrossJudgeCell cell;
            auto it = run.totals_by_model.find(model);
            cell.total = it == run.totals_by_model.end() ? 0 : it->second;
            cell.rank = rank_of[model];
            cell.self_judgment = model == run.judge_id;
            report.cells[run.judge_id][model] = cell;
        }
    }
    return report;
}

}  // namespace faitheval
