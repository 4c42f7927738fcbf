// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faitheval/cli.hpp"
#include "faitheval/config.hpp"
#include "faitheval/judge.hpp"
#include "faitheval/leaderboard.hpp"
#include "faitheval/metrics.hpp"
#include "faitheval/report.hpp"
#include "faitheval/runfile.hpp"

using namespace faitheval;
using nlohmann::json;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
    if (!condition) throw CheckFailure(message);
}

std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(FAITHEVAL_FIXTURE_DIR) / name;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path,
                const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

struct Scratch {
    std::filesystem::path dir;
    Scratch() {
        dir = std::filesystem::temp_directory_path() /
              ("faitheval-acceptance-" +
               std::to_string(std::random_device{}()));
        std::filesystem::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
};

// ---------------------------------------------------------------- 1 ----
void criterion_metric_oracle() {
    auto start = std::chrono::steady_clock::now();
    ConfusionMatrix matrix(
        {"Unwanted", "Questionable", "Benign", "Consistent"},
        {"Consistent", "Inconsistent"});
    matrix.add("Unwanted", "Consistent", 74);
    matrix.add("Unwanted", "Inconsistent", 322);
    matrix.add("Questionable", "Consistent", 29);
    matrix.add("Questionable", "Inconsistent", 38);
    matrix.add("Benign", "Consistent", 50);
    matrix.add("Benign", "Inconsistent", 34);
    matrix.add("Consistent", "Consistent", 176);
    matrix.add("Consistent", "Inconsistent", 27);
    auto report =
        binary_metrics(matrix, "Inconsistent", GoldPolicy::StrictBinary);
    require(std::abs(report.balanced_accuracy - 84.0) <= 0.05,
            "balanced accuracy " +
                std::to_string(report.balanced_accuracy) +
                " not within 0.05 of 84.0");
    require(std::abs(report.f1_macro - 82.1) <= 0.05,
            "F1-macro " + std::to_string(report.f1_macro) +
                " not within 0.05 of 82.1");
    require(round_percent(report.balanced_accuracy) == 84.0,
            "rounded balanced accuracy != 84.0");
    require(round_percent(report.f1_macro) == 82.1,
            "rounded F1-macro != 82.1");
    // Benign/Questionable rows stay excluded from the strict computation
    require(report.n_scored == 74 + 322 + 176 + 27,
            "strict mode scored the excluded rows");
    auto elapsed = std::chrono::steady_clock::now() - start;
    require(elapsed < std::chrono::seconds(1), "criterion exceeded 1s");
}

// ---------------------------------------------------------------- 2 ----
void criterion_leaderboard_arithmetic() {
    auto start = std::chrono::steady_clock::now();
    struct Row {
        const char* model;
        std::size_t fb, rts, rtq, rtd;
    };
    const Row rows[] = {
        {"gemini-2.5-pro", 18, 7, 2, 7},
        {"gemini-2.0-flash", 21, 10, 1, 20},
        {"gpt-4.5-preview", 27, 15, 7, 12},
        {"o3-mini-high", 25, 12, 9, 18},
        {"gpt-3.5-turbo", 32, 13, 8, 23},
        {"gpt-4o", 29, 15, 7, 30},
        {"claude-3.7-sonnet", 28, 22, 13, 19},
        {"llama-3.3-70b", 32, 13, 6, 33},
        {"phi-4", 32, 12, 6, 37},
        {"mistral-small-24b", 31, 15, 14, 27},
        {"llama-4-maverick", 37, 20, 13, 35},
        {"llama-3.1-8b", 32, 19, 17, 77},
    };
    std::vector<LeaderboardEntry> entries;
    for (const auto& row : rows) {
        LeaderboardEntry entry;
        entry.model = row.model;
        entry.per_subset["faithbench_summary"] = {row.fb, 72};
        entry.per_subset["ragtruth_summary"] = {row.rts, 150};
        entry.per_subset["ragtruth_qa"] = {row.rtq, 139};
        entry.per_subset["ragtruth_data_to_text"] = {row.rtd, 150};
        entries.push_back(std::move(entry));
    }
    auto ranked = build_leaderboard(entries);
    const std::vector<std::pair<std::string, const char*>> expected = {
        {"gemini-2.5-pro", "6.65%"},    {"gemini-2.0-flash", "10.18%"},
        {"gpt-4.5-preview", "11.94%"},  {"o3-mini-high", "12.52%"},
        {"gpt-3.5-turbo", "14.87%"},    {"gpt-4o", "15.85%"},
        {"claude-3.7-sonnet", "16.05%"}, {"llama-3.3-70b", "16.44%"},
        {"mistral-small-24b", "17.03%"}, {"phi-4", "17.03%"},
        {"llama-4-maverick", "20.55%"},  {"llama-3.1-8b", "28.38%"},
    };
    require(ranked.size() == 12, "expected 12 entries");
    for (std::size_t i = 0; i < 12; ++i) {
        require(ranked[i].rank == i + 1, "ranks not contiguous");
        require(ranked[i].model == expected[i].first,
                "rank " + std::to_string(i + 1) + " is " + ranked[i].model +
                    ", expected " + expected[i].first);
        require(format_rate(ranked[i].overall_rate) == expected[i].second,
                ranked[i].model + " rate " +
                    format_rate(ranked[i].overall_rate) + " != " +
                    expected[i].second);
    }
    // the 17.03 tie resolves by model name and is documented in the report
    auto markdown = render_leaderboard_markdown(ranked);
    require(markdown.find("identical overall rates") != std::string::npos,
            "tie not documented in the rendered report");
    auto elapsed = std::chrono::steady_clock::now() - start;
    require(elapsed < std::chrono::seconds(1), "criterion exceeded 1s");
}

// ---------------------------------------------------------------- 3 ----
void criterion_cross_judge_roundtrip() {
    Scratch scratch;
    // pre-scored leaderboard run, judged by o3-mini-high: 52/64/105
    // hallucinated responses over 511 candidates per evaluated model
    const std::map<std::string, std::size_t> totals = {
        {"gemini-2.0-flash", 52},
        {"o3-mini-high", 64},
        {"llama-4-maverick", 105},
    };
    RunFile run;
    run.command = "leaderboard";
    run.mode = "binary";
    run.flavor = "annotated";
    run.judge_backends = {"o3-mini-high"};
    for (const auto& [model, hallucinated] : totals) {
        for (std::size_t i = 0; i < 511; ++i) {
            RunItem item;
            item.subset = "pooled";
            item.source_id = "src-" + std::to_string(i);
            item.response_id = item.source_id + "::cand::" + model;
            item.model = model;
            item.klass = i < hallucinated ? "Inconsistent" : "Consistent";
            run.items.push_back(std::move(item));
        }
    }
    auto path = scratch.dir / "o3_run.json";
    save_run_file(run, path);

    // second judge so the report is a comparison, not a single column
    RunFile other = run;
    other.judge_backends = {"gemini-2.0-flash"};
    auto other_path = scratch.dir / "gemini_run.json";
    save_run_file(other, other_path);

    auto report = cross_judge_report(
        {summarize_run(load_run_file(path)),
         summarize_run(load_run_file(other_path))});
    const auto& column = report.cells.at("o3-mini-high");
    require(column.at("gemini-2.0-flash").total == 52, "expected 52");
    require(column.at("o3-mini-high").total == 64, "expected 64");
    require(column.at("llama-4-maverick").total == 105, "expected 105");
    require(column.at("gemini-2.0-flash").rank == 1, "rank 1 mismatch");
    require(column.at("o3-mini-high").rank == 2, "rank 2 mismatch");
    require(column.at("llama-4-maverick").rank == 3, "rank 3 mismatch");
    require(column.at("o3-mini-high").self_judgment,
            "self-judgment cell not flagged");
    require(!column.at("gemini-2.0-flash").self_judgment,
            "non-self cell flagged");
}

// ---------------------------------------------------------------- 4 ----
void criterion_property_suite() {
    // (a) brute-force metric oracle on >= 1000 random matrices
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<std::uint64_t> cell(0, 500);
    std::size_t checked = 0;
    while (checked < 1000) {
        std::uint64_t tp = cell(rng), fn = cell(rng), fp = cell(rng),
                      tn = cell(rng);
        if (tp + fn == 0 || fp + tn == 0) continue;
        ConfusionMatrix matrix({"Unwanted", "Consistent"},
                               {"Consistent", "Inconsistent"});
        matrix.add("Unwanted", "Inconsistent", tp);
        matrix.add("Unwanted", "Consistent", fn);
        matrix.add("Consistent", "Inconsistent", fp);
        matrix.add("Consistent", "Consistent", tn);
        auto report = binary_metrics(matrix);

        double recall_pos =
            double(tp) / double(tp + fn);
        double recall_neg = double(tn) / double(tn + fp);
        double precision_pos =
            (tp + fp) ? double(tp) / double(tp + fp) : 0.0;
        double precision_neg =
            (tn + fn) ? double(tn) / double(tn + fn) : 0.0;
        auto f1 = [](double p, double r) {
            return (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
        };
        double expect_ba = 100.0 * (recall_pos + recall_neg) / 2;
        double expect_f1 = 100.0 * (f1(precision_pos, recall_pos) +
                                    f1(precision_neg, recall_neg)) / 2;
        require(std::abs(report.balanced_accuracy - expect_ba) < 1e-9,
                "balanced accuracy diverges from the brute-force oracle");
        require(std::abs(report.f1_macro - expect_f1) < 1e-9,
                "F1-macro diverges from the brute-force oracle");

        // (b) scale invariance
        ConfusionMatrix scaled({"Unwanted", "Consistent"},
                               {"Consistent", "Inconsistent"});
        scaled.add("Unwanted", "Inconsistent", tp * 7);
        scaled.add("Unwanted", "Consistent", fn * 7);
        scaled.add("Consistent", "Inconsistent", fp * 7);
        scaled.add("Consistent", "Consistent", tn * 7);
        auto scaled_report = binary_metrics(scaled);
        require(std::abs(scaled_report.balanced_accuracy -
                         report.balanced_accuracy) < 1e-9,
                "scale invariance (balanced accuracy) violated");
        require(std::abs(scaled_report.f1_macro - report.f1_macro) < 1e-9,
                "scale invariance (F1-macro) violated");

        // (c) class-swap invariance
        ConfusionMatrix swapped({"Consistent", "Inconsistent"},
                                {"Consistent", "Inconsistent"});
        swapped.add("Inconsistent", "Inconsistent", tp);
        swapped.add("Inconsistent", "Consistent", fn);
        swapped.add("Consistent", "Inconsistent", fp);
        swapped.add("Consistent", "Consistent", tn);
        auto as_pos =
            binary_metrics(swapped, "Inconsistent", GoldPolicy::Identity);
        auto as_neg =
            binary_metrics(swapped, "Consistent", GoldPolicy::Identity);
        require(std::abs(as_pos.balanced_accuracy -
                         as_neg.balanced_accuracy) < 1e-9,
                "class-swap balanced accuracy changed");
        require(std::abs(as_pos.f1_macro - as_neg.f1_macro) < 1e-9,
                "class-swap F1-macro changed");
        ++checked;
    }

    // (d) pooling: exhaustive enumeration for up to 5 annotators
    using L = HallucinationLabel;
    const std::vector<L> domain = {L::Consistent, L::Benign,
                                   L::Questionable, L::Unwanted};
    std::function<void(std::vector<L>&, std::size_t)> walk =
        [&](std::vector<L>& labels, std::size_t remaining) {
            if (!labels.empty()) {
                L pooled = pool_gold_label(labels);
                // oracle: most severe level with a strict majority at or
                // above it
                L expected = L::Consistent;
                for (L level : {L::Benign, L::Questionable, L::Unwanted}) {
                    std::size_t count = 0;
                    for (L label : labels)
                        if (static_cast<int>(label) >=
                            static_cast<int>(level))
                            ++count;
                    if (2 * count > labels.size()) expected = level;
                }
                require(pooled == expected, "pooling oracle mismatch");
                // permutation invariance (reversed order)
                std::vector<L> reversed(labels.rbegin(), labels.rend());
                require(pool_gold_label(reversed) == pooled,
                        "pooling not permutation-invariant");
                // monotonicity under raising one label
                for (std::size_t i = 0; i < labels.size(); ++i) {
                    if (labels[i] == L::Unwanted) continue;
                    std::vector<L> raised = labels;
                    raised[i] =
                        static_cast<L>(static_cast<int>(raised[i]) + 1);
                    require(pool_gold_label(raised) >= pooled,
                            "pooling not monotone");
                }
            }
            if (remaining == 0) return;
            for (L label : domain) {
                labels.push_back(label);
                walk(labels, remaining - 1);
                labels.pop_back();
            }
        };
    std::vector<L> labels;
    walk(labels, 5);

    // (e) majority vote properties, including the two-vote tie
    auto verdict = [](VerdictClass klass, bool invalid = false) {
        JudgeVerdict v;
        v.mode = JudgeMode::Binary;
        v.klass = klass;
        v.invalid_response = invalid;
        return v;
    };
    using VC = VerdictClass;
    require(majority_vote(std::vector{verdict(VC::Consistent),
                                      verdict(VC::Inconsistent)})
                    .klass == VC::Inconsistent,
            "[Consistent, Inconsistent] must tie to Inconsistent");
    require(majority_vote(std::vector{verdict(VC::Consistent),
                                      verdict(VC::Inconsistent),
                                      verdict(VC::Inconsistent)})
                    .klass == VC::Inconsistent,
            "strict majority failed");
    require(majority_vote(std::vector{verdict(VC::Consistent),
                                      verdict(VC::Consistent),
                                      verdict(VC::Inconsistent)})
                    .klass == VC::Consistent,
            "strict majority failed");
    std::vector<JudgeVerdict> votes = {
        verdict(VC::Consistent), verdict(VC::Inconsistent),
        verdict(VC::Inconsistent), verdict(VC::Consistent),
        verdict(VC::Consistent)};
    auto expected_class = majority_vote(votes).klass;
    std::mt19937_64 vote_rng(3);
    for (int round = 0; round < 30; ++round) {
        std::shuffle(votes.begin(), votes.end(), vote_rng);
        require(majority_vote(votes).klass == expected_class,
                "majority vote not permutation-invariant");
    }
    for (auto klass : {VC::Consistent, VC::Inconsistent}) {
        require(majority_vote(std::vector{verdict(klass), verdict(klass),
                                          verdict(klass)})
                        .klass == klass,
                "majority vote not idempotent on unanimous input");
    }
}

// ---------------------------------------------------------------- 5 ----
void criterion_leave_one_out_audit() {
    for (const auto& [path, format] :
         std::vector<std::pair<std::string, DatasetFormat>>{
             {"faithbench_small.json", DatasetFormat::FaithbenchJson},
             {"native_small.jsonl", DatasetFormat::NativeJsonl}}) {
        auto bundle = load_dataset(fixture(path), format);
        for (const auto& example : binary_eval_subset(bundle)) {
            const auto& target = *example.response;
            const auto& source = bundle.source_of(target);
            std::vector<const AnnotatedResponse*> peers;
            for (const auto* peer : bundle.responses_for(source.id))
                if (peer->id != target.id && peer->gold) peers.push_back(peer);
            auto prompt = build_annotated_judge_prompt(target, peers, source);
            // id audit
            auto ids = prompt.meta.at("example_ids");
            require(("," + ids + ",").find("," + target.id + ",") ==
                        std::string::npos,
                    "target id leaked into its own examples");
            // verbatim-text audit over the example section
            const std::string& user = prompt.messages[1].text;
            auto begin = user.find("== Annotated example");
            auto end = user.find("== Response to evaluate");
            require(begin != std::string::npos && end != std::string::npos,
                    "prompt sections missing");
            require(user.substr(begin, end - begin).find(target.text) ==
                        std::string::npos,
                    "target text leaked into its own examples");
        }
    }

    // the k = max override is flagged in sweep output
    auto bundle = load_dataset(fixture("faithbench_small.json"),
                               DatasetFormat::FaithbenchJson);
    MockChatClient client(
        [](const PromptBundle&) {
            return std::string("Final classification: Consistent");
        },
        MockChatClient::mock_spec());
    auto rows = example_count_sweep(bundle, client, {9, 10}, 1, nullptr,
                                    TemplateSet::builtin());
    require(rows.size() == 2, "sweep row count");
    require(!rows[0].self_inclusive, "k=9 wrongly flagged");
    require(rows[1].self_inclusive, "k=10 not flagged self-inclusive");
    auto rendered = render_sweep_markdown(rows);
    require(rendered.find("10*") != std::string::npos,
            "sweep table missing the asterisk");
}

// ---------------------------------------------------------------- 6 ----
void criterion_determinism_and_cache() {
    Scratch scratch;
    auto out_dir = scratch.dir / "out";
    std::string config_text =
        "dataset.fixture.path = " +
        fixture("faithbench_small.json").string() + "\n" +
        "dataset.fixture.format = faithbench_json\n"
        "dataset.fixture.task = summarization\n"
        "backend.judge_a.endpoint = http://127.0.0.1:9/v1\n"
        "backend.judge_a.model = judge-model\n"
        "backend.judge_a.role = judge\n"
        "mode = binary\n"
        "flavor = annotated\n"
        "seed = 42\n"
        "max_examples = 4\n" +
        "cache_dir = " + (scratch.dir / "cache").string() + "\n" +
        "out_dir = " + out_dir.string() + "\n";
    auto config_path = scratch.dir / "run.cfg";
    write_file(config_path, config_text);

    auto bundle = std::make_shared<DatasetBundle>(
        load_dataset(fixture("faithbench_small.json"),
                     DatasetFormat::FaithbenchJson));
    auto make_factory = [&](std::shared_ptr<MockStats> stats) {
        return [bundle, stats](const BackendSpec& spec)
                   -> std::unique_ptr<ChatClient> {
            BackendSpec fast = spec;
            fast.retry.base_backoff = std::chrono::milliseconds(1);
            return std::make_unique<MockChatClient>(
                [bundle](const PromptBundle& prompt) -> std::string {
                    auto it = prompt.meta.find("target_id");
                    auto response = bundle->responses.find(
                        it == prompt.meta.end() ? "" : it->second);
                    bool consistent =
                        response != bundle->responses.end() &&
                        response->second.gold ==
                            HallucinationLabel::Consistent;
                    return std::string("Final classification: ") +
                           (consistent ? "Consistent" : "Inconsistent");
                },
                fast, stats.get());
        };
    };

    std::ostringstream sink;
    auto cold_stats = std::make_shared<MockStats>();
    int first = cli::run({"judge", "--config", config_path.string()},
                         make_factory(cold_stats), sink, sink);
    require(first == cli::kExitOk, "first run failed");
    auto run_bytes = read_file(out_dir / "judge_run.json");
    auto metric_bytes = read_file(out_dir / "metrics.json");
    require(cold_stats->calls.load() == 30, "cold run should judge all 30");

    auto warm_stats = std::make_shared<MockStats>();
    int second = cli::run({"judge", "--config", config_path.string()},
                          make_factory(warm_stats), sink, sink);
    require(second == cli::kExitOk, "second run failed");
    require(warm_stats->calls.load() == 0,
            "warm rerun issued backend calls (expected zero)");
    require(read_file(out_dir / "judge_run.json") == run_bytes,
            "run files differ between identical runs");
    require(read_file(out_dir / "metrics.json") == metric_bytes,
            "metric reports differ between identical runs");
}

// ---------------------------------------------------------------- 7 ----
void criterion_refusal_boundary() {
    std::string text;
    for (int tokens = 0; tokens <= 10; ++tokens) {
        require(detect_refusal(text) == (tokens <= 5),
                "refusal rule wrong at " + std::to_string(tokens) +
                    " tokens");
        text += (tokens ? " w" : "w");
    }
    require(detect_refusal("I cannot summarize this article."),
            "five-token refusal not detected");
    require(!detect_refusal("I cannot summarize this short article."),
            "six-token response wrongly flagged");
    require(detect_refusal(""), "empty string must be a refusal");
}

// ---------------------------------------------------------------- 8 ----
void criterion_parse_robustness() {
    auto cases = json::parse(read_file(fixture("parse_cases.json")));
    require(cases.size() == 50, "fixture must hold 50 outputs");
    std::vector<ScoredPair> pairs;
    std::size_t fallbacks = 0;
    for (const auto& entry : cases) {
        auto mode = mode_from_name(entry.at("mode").get<std::string>());
        auto verdict = parse_verdict(entry.at("raw").get<std::string>(),
                                     mode);  // must never throw
        require(verdict.parse_ok == entry.at("expect_parse_ok").get<bool>(),
                "parse_ok mismatch on: " +
                    entry.at("raw").get<std::string>());
        require(std::string(verdict_class_name(verdict.klass)) ==
                    entry.at("expect_class").get<std::string>(),
                "class mismatch on: " + entry.at("raw").get<std::string>());
        require(verdict.invalid_response ==
                    entry.at("expect_invalid").get<bool>(),
                "invalid flag mismatch");
        if (!verdict.parse_ok) {
            ++fallbacks;
            require(verdict.klass == fallback_class(mode),
                    "fallback class mismatch");
        }
        if (mode == JudgeMode::Binary) {
            pairs.push_back({verdict.klass == VerdictClass::Inconsistent
                                 ? "Unwanted"
                                 : "Consistent",
                             std::string(verdict_class_name(verdict.klass)),
                             !verdict.parse_ok});
        }
    }
    require(fallbacks == 10, "expected 10 garbage outputs");
    auto report = score_pairs(pairs, GoldPolicy::StrictBinary);
    require(report.parse_fallbacks == 10,
            "fallback count missing from the metric report");
}

// ---------------------------------------------------------------- 9 ----
void criterion_ingestion_fidelity() {
    auto faithbench = load_dataset(fixture("faithbench_small.json"),
                                   DatasetFormat::FaithbenchJson);
    require(faithbench.sources.size() == 3, "expected 3 articles");
    require(faithbench.responses.size() == 30,
            "expected 10 responses per article");
    for (const auto& [id, doc] : faithbench.sources)
        require(faithbench.responses_for(id).size() == 10,
                "article without exactly 10 responses");

    // synthetic RAGTruth-shaped corpus: 160 sources, the first one carries
    // no hallucination annotation anywhere and must be dropped before the
    // 150-source cap applies
    Scratch scratch;
    std::ostringstream source_lines;
    std::ostringstream response_lines;
    for (int i = 0; i < 160; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "rt-%03d", i);
        json source = {
            {"source_id", id},
            {"task_type", "QA"},
            {"source_info",
             {{"question", "What happened?"},
              {"passages", "passage: item " + std::to_string(i) +
                               " happened on schedule."}}},
        };
        source_lines << source.dump() << "\n";
        json clean = {
            {"id", std::string(id) + "-r1"},
            {"source_id", id},
            {"model", "gpt-4"},
            {"response", "Item " + std::to_string(i) +
                             " happened on schedule."},
            {"labels", json::array()},
        };
        response_lines << clean.dump() << "\n";
        if (i != 0) {  // rt-000 stays annotation-free
            std::string bad_text = "Item " + std::to_string(i) +
                                   " was cancelled midway.";
            json labeled = {
                {"id", std::string(id) + "-r2"},
                {"source_id", id},
                {"model", "mistral-7b"},
                {"response", bad_text},
                {"labels",
                 json::array({{{"start", 0},
                               {"end", 4},
                               {"label_type", "Evident Conflict"},
                               {"text", "Item"}}})},
            };
            response_lines << labeled.dump() << "\n";
        }
    }
    write_file(scratch.dir / "rt" / "source_info.jsonl",
               source_lines.str());
    write_file(scratch.dir / "rt" / "response.jsonl",
               response_lines.str());

    auto ragtruth = load_dataset(scratch.dir / "rt",
                                 DatasetFormat::RagtruthJsonl);
    require(ragtruth.sources.size() == 160, "expected 160 sources");
    auto capped =
        leaderboard_eval_subset(ragtruth, TaskKind::QuestionAnswering);
    require(capped.size() == 150, "default cap must keep 150 sources");
    for (const auto& entry : capped)
        require(entry.source->id != "rt-000",
                "annotation-free source not dropped");
    auto uncapped = leaderboard_eval_subset(
        ragtruth, TaskKind::QuestionAnswering, 500);
    require(uncapped.size() == 159,
            "expected 159 annotated sources before the cap");
}

struct Criterion {
    int number;
    const char* name;
    std::function<void()> body;
};

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<Criterion> criteria = {
        {1, "metric oracle vs reference confusion counts",
         criterion_metric_oracle},
        {2, "leaderboard arithmetic and rank order",
         criterion_leaderboard_arithmetic},
        {3, "cross-judge totals round-trip through run files",
         criterion_cross_judge_roundtrip},
        {4, "property suite (metrics oracle, pooling, majority vote)",
         criterion_property_suite},
        {5, "leave-one-out audit and self-inclusion flag",
         criterion_leave_one_out_audit},
        {6, "determinism and warm-cache zero-call rerun",
         criterion_determinism_and_cache},
        {7, "refusal boundary at five tokens", criterion_refusal_boundary},
        {8, "parse robustness over 50 synthetic outputs",
         criterion_parse_robustness},
        {9, "ingestion fidelity and the 150-source cap",
         criterion_ingestion_fidelity},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        try {
            criterion.body();
            std::printf("PASS  %d. %s\n", criterion.number, criterion.name);
        } catch (const std::exception& e) {
            ++failures;
            std::printf("FAIL  %d. %s: %s\n", criterion.number,
                        criterion.name, e.what());
        }
    }
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
