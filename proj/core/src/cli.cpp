#include "faitheval/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faitheval/concurrency.hpp"
#include "faitheval/config.hpp"
#include "faitheval/metrics.hpp"
#include "faitheval/report.hpp"
#include "faitheval/runfile.hpp"

namespace faitheval::cli {

using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config_path;
    bool mock = false;
    std::optional<std::string> replay_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
};

void apply_overrides(RunConfig& config, const CommonOptions& options) {
    if (options.out_dir) {
        config.out_dir = *options.out_dir;
        config.raw["out_dir"] = *options.out_dir;
    }
    if (options.seed) {
        config.seed = *options.seed;
        config.raw["seed"] = std::to_string(*options.seed);
    }
}

void write_file(const std::filesystem::path& path,
                const std::string& content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + path.string());
    out << content;
}

// ---------------------------------------------------------------------
// mock backends: deterministic gold-echo scripts over the loaded corpora
// ---------------------------------------------------------------------

struct MockContext {
    std::map<std::string, HallucinationLabel> gold_by_response;
};

std::string echo_gold_reply(const MockContext& context,
                            const PromptBundle& prompt) {
    auto gold_of = [&](const std::string& id) {
        auto it = context.gold_by_response.find(id);
        return it == context.gold_by_response.end()
                   ? HallucinationLabel::Consistent
                   : it->second;
    };
    auto meta = [&](const char* key) -> std::string {
        auto it = prompt.meta.find(key);
        return it == prompt.meta.end() ? std::string() : it->second;
    };

    switch (prompt.flavor) {
        case PromptFlavor::Generation:
            return "This mock response stays strictly grounded in source " +
                   meta("source_id") + " and adds no outside facts at all.";
        case PromptFlavor::ClaimDecompose: {
            std::size_t sentences = 0;
            try {
                sentences = std::stoul(meta("sentence_count"));
            } catch (const std::exception&) {
            }
            std::ostringstream os;
            for (std::size_t i = 1; i <= sentences; ++i)
                os << "S" << i << ".C1: mock claim " << i << "\n";
            return os.str();
        }
        case PromptFlavor::ClaimsVerify: {
            std::size_t claims = 0;
            try {
                claims = std::stoul(meta("claim_count"));
            } catch (const std::exception&) {
            }
            bool consistent =
                gold_of(meta("target_id")) == HallucinationLabel::Consistent;
            std::ostringstream os;
            for (std::size_t i = 1; i <= claims; ++i) {
                os << i << ". "
                   << (!consistent && i == 1 ? "unsupported" : "supported")
                   << "\n";
            }
            os << "Final classification: "
               << (consistent ? "Consistent" : "Inconsistent") << "\n";
            return os.str();
        }
        default: {
            HallucinationLabel gold = gold_of(meta("target_id"));
            std::string klass;
            if (meta("mode") == "ternary") {
                switch (gold) {
                    case HallucinationLabel::Consistent:
                        klass = "Consistent";
                        break;
                    case HallucinationLabel::Benign:
                        klass = "Benign";
                        break;
                    default:
                        klass = "Unwanted";
                }
            } else {
                klass = gold == HallucinationLabel::Consistent
                            ? "Consistent"
                            : "Inconsistent";
            }
            return "Scripted verdict for " + meta("target_id") + ".\n" +
                   "Final classification: " + klass + "\n";
        }
    }
}

ClientFactory make_mock_factory(std::shared_ptr<MockContext> context) {
    return [context](const BackendSpec& spec) -> std::unique_ptr<ChatClient> {
        BackendSpec mock_spec = spec;
        mock_spec.retry.base_backoff = std::chrono::milliseconds(1);
        return std::make_unique<MockChatClient>(
            [context](const PromptBundle& prompt) {
                return echo_gold_reply(*context, prompt);
            },
            mock_spec);
    };
}

ClientFactory make_http_factory() {
    return [](const BackendSpec& spec) -> std::unique_ptr<ChatClient> {
        if (!spec.auth_env.empty() && !std::getenv(spec.auth_env.c_str()))
            throw MissingCredentialsError(
                spec.id,
                "environment variable " + spec.auth_env + " is not set");
        return std::make_unique<HttpChatClient>(spec);
    };
}

struct LoadedDatasets {
    std::vector<std::pair<DatasetRef, DatasetBundle>> bundles;
    std::shared_ptr<MockContext> mock_context = std::make_shared<MockContext>();
};

LoadedDatasets load_all(const RunConfig& config) {
    if (config.datasets.empty())
        throw ConfigError("no datasets configured (dataset.<id>.path)");
    LoadedDatasets loaded;
    for (const auto& ref : config.datasets) {
        DatasetBundle bundle = load_dataset(ref.path, ref.format);
        for (const auto& [id, response] : bundle.responses) {
            if (response.gold)
                loaded.mock_context->gold_by_response[id] = *response.gold;
        }
        loaded.bundles.emplace_back(ref, std::move(bundle));
    }
    return loaded;
}

ClientFactory pick_factory(const ClientFactory& injected, bool mock,
                           const std::shared_ptr<MockContext>& context) {
    if (injected) return injected;
    if (mock) return make_mock_factory(context);
    return make_http_factory();
}

TemplateSet resolve_templates(const RunConfig& config) {
    if (config.template_dir) return TemplateSet::load_dir(*config.template_dir);
    return TemplateSet::builtin();
}

PromptFlavor judge_flavor(const RunConfig& config) {
    if (config.flavor == "facts_json") return PromptFlavor::FactsJson;
    if (config.flavor == "chain_of_thought")
        return PromptFlavor::ChainOfThought;
    if (config.flavor == "claims") return PromptFlavor::ClaimsVerify;
    return config.mode == JudgeMode::Binary ? PromptFlavor::AnnotatedBinary
                                            : PromptFlavor::AnnotatedTernary;
}

// ---------------------------------------------------------------------
// judge command
// ---------------------------------------------------------------------

void write_judge_outputs(const RunFile& run, const RunConfig& config,
                         std::ostream& out) {
    save_run_file(run, config.out_dir / "judge_run.json");
    try {
        MetricReport report = metrics_from_run(run);
        write_file(config.out_dir / "metrics.json",
                   render_metric_report_json(report));
        out << render_metric_report_text(report) << "\n";
    } catch (const MetricsError& e) {
        out << "no metrics: " << e.what() << "\n";
    }
}

int cmd_judge(const CommonOptions& options, const ClientFactory& injected,
              std::ostream& out, std::ostream& err) {
    RunConfig config = parse_config_file(options.config_path);
    apply_overrides(config, options);

    if (options.replay_path) {
        RunFile run = load_run_file(*options.replay_path);
        replay_verdicts(run);
        write_judge_outputs(run, config, out);
        return run.final_run ? kExitOk : kExitCoverage;
    }

    TemplateSet templates = resolve_templates(config);
    LoadedDatasets loaded = load_all(config);
    if (config.judges.empty())
        throw ConfigError("no judge backends configured "
                          "(backend.<id>.role = judge)");
    if (config.flavor == "claims" && config.judges.size() > 1)
        throw ConfigError("the claims flavor uses a single judge backend");

    ClientFactory factory =
        pick_factory(injected, options.mock, loaded.mock_context);
    std::vector<std::unique_ptr<ChatClient>> clients;
    std::vector<ChatClient*> client_ptrs;
    int max_parallel = 1 << 20;
    for (const auto& spec : config.judges) {
        clients.push_back(factory(spec));
        client_ptrs.push_back(clients.back().get());
        max_parallel = std::min(max_parallel, spec.max_parallel);
    }

    DiskCache cache(config.cache_dir);

    RunFile run;
    run.command = "judge";
    run.config = config.raw;
    run.seed = config.seed;
    run.mode = std::string(mode_name(config.mode));
    run.flavor = config.flavor;
    run.template_set_hash = templates.set_hash();
    run.template_version = templates.get(judge_flavor(config)).version;
    for (const auto& spec : config.judges) run.judge_backends.push_back(spec.id);

    bool all_scored = true;
    for (const auto& [ref, bundle] : loaded.bundles) {
        std::vector<const AnnotatedResponse*> targets;
        for (const auto& [id, response] : bundle.responses) {
            if (response.gold) targets.push_back(&response);
        }
        auto judge_one = [&, &ref = ref,
                          &bundle = bundle](std::size_t i) -> RunItem {
            const AnnotatedResponse& target = *targets[i];
            const SourceDocument& source = bundle.source_of(target);
            RunItem item;
            item.subset = ref.id;
            item.response_id = target.id;
            item.source_id = source.id;
            item.model = target.generator;
            item.gold = std::string(label_name(*target.gold));

            if (config.flavor == "annotated") {
                std::vector<const AnnotatedResponse*> peers;
                for (const auto* peer : bundle.responses_for(source.id)) {
                    if (peer->id != target.id && peer->gold)
                        peers.push_back(peer);
                }
                AnnotatedPromptOptions prompt_options;
                prompt_options.mode = config.mode;
                prompt_options.max_examples = config.max_examples;
                prompt_options.sample_seed =
                    derive_seed(config.seed, target.id);
                std::vector<JudgeVerdict> votes;
                JudgeOutcome outcome = judge_response_ensemble(
                    target, peers, source, client_ptrs, prompt_options,
                    &cache, templates, &votes);
                item.prompt_hash = outcome.prompt_hash;
                item.example_count = outcome.example_count;
                item.self_included = outcome.self_included;
                item.klass = std::string(
                    verdict_class_name(outcome.verdict.klass));
                item.invalid = outcome.verdict.invalid_response;
                item.parse_ok = outcome.verdict.parse_ok;
                for (std::size_t v = 0; v < votes.size(); ++v) {
                    item.votes.push_back(
                        {config.judges[v].id, votes[v].raw,
                         std::string(verdict_class_name(votes[v].klass)),
                         votes[v].invalid_response, votes[v].parse_ok});
                }
            } else if (config.flavor == "claims") {
                JudgeOutcome outcome =
                    judge_claimwise(source, target, *client_ptrs[0],
                                    *client_ptrs[0], &cache, templates);
                item.prompt_hash = outcome.prompt_hash;
                item.klass = std::string(
                    verdict_class_name(outcome.verdict.klass));
                item.invalid = outcome.verdict.invalid_response;
                item.parse_ok = outcome.verdict.parse_ok;
                item.votes.push_back(
                    {config.judges[0].id, outcome.verdict.raw, item.klass,
                     item.invalid, item.parse_ok});
            } else {
                PromptBundle bundle_prompt = build_zero_shot_prompt(
                    judge_flavor(config), source, target.text, templates);
                bundle_prompt.meta["target_id"] = target.id;
                item.prompt_hash = bundle_prompt.content_hash;
                std::vector<JudgeVerdict> votes;
                for (auto* client : client_ptrs) {
                    std::string raw =
                        complete(*client, bundle_prompt, &cache);
                    votes.push_back(parse_verdict(raw, config.mode));
                }
                JudgeVerdict final_verdict =
                    votes.size() == 1 ? votes.front() : majority_vote(votes);
                item.klass = std::string(
                    verdict_class_name(final_verdict.klass));
                item.invalid = final_verdict.invalid_response;
                item.parse_ok = final_verdict.parse_ok;
                for (std::size_t v = 0; v < votes.size(); ++v) {
                    item.votes.push_back(
                        {config.judges[v].id, votes[v].raw,
                         std::string(verdict_class_name(votes[v].klass)),
                         votes[v].invalid_response, votes[v].parse_ok});
                }
            }
            return item;
        };
        auto results = parallel_map<RunItem>(targets.size(), max_parallel,
                                             judge_one);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (results[i].ok()) {
                run.items.push_back(std::move(*results[i].value));
            } else {
                RunItem failed;
                failed.subset = ref.id;
                failed.response_id = targets[i]->id;
                failed.source_id = targets[i]->source_id;
                failed.model = targets[i]->generator;
                failed.gold = std::string(label_name(*targets[i]->gold));
                failed.scored = false;
                failed.error = results[i].error;
                run.items.push_back(std::move(failed));
                all_scored = false;
                err << "unscored " << targets[i]->id << ": "
                    << results[i].error << "\n";
            }
        }
    }

    run.final_run = all_scored;
    write_judge_outputs(run, config, out);
    if (!all_scored) {
        err << "coverage below 100%; run file marked non-final\n";
        return kExitCoverage;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------
// validate command
// ---------------------------------------------------------------------

int cmd_validate(const CommonOptions& options, std::ostream& out,
                 std::ostream& err) {
    RunConfig config = parse_config_file(options.config_path);
    if (config.datasets.empty())
        throw ConfigError("no datasets configured (dataset.<id>.path)");
    bool clean = true;
    std::size_t total_sources = 0;
    std::size_t total_responses = 0;
    for (const auto& ref : config.datasets) {
        try {
            DatasetBundle bundle = load_dataset(ref.path, ref.format);
            validate_bundle(bundle);
            out << "dataset " << ref.id << ": " << bundle.sources.size()
                << " sources, " << bundle.responses.size()
                << " responses, 0 errors\n";
            total_sources += bundle.sources.size();
            total_responses += bundle.responses.size();
            try {
                auto subset = leaderboard_eval_subset(bundle, ref.task,
                                                      config.subset_cap);
                out << "subset " << ref.id << " (" << task_name(ref.task)
                    << "): " << subset.size() << " sources post-filter\n";
            } catch (const UsageError&) {
                // dataset without this task; counts above still stand
            }
        } catch (const CorpusError& e) {
            clean = false;
            err << "dataset " << ref.id << ": " << e.issues().size()
                << " error(s)\n"
                << e.what() << "\n";
        }
    }
    if (clean)
        out << "total: " << total_sources << " sources, " << total_responses
            << " responses across " << config.datasets.size()
            << " dataset(s)\n";
    return clean ? kExitOk : kExitCorpus;
}

// ---------------------------------------------------------------------
// leaderboard command
// ---------------------------------------------------------------------

std::map<std::string, GenerationRecord> generations_from_file(
    const std::filesystem::path& path, const std::string& model) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open candidate responses file " +
                          path.string());
    std::map<std::string, GenerationRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json record = json::parse(line);
            if (record.value("kind", std::string("response")) != "response")
                continue;
            GenerationRecord generation;
            generation.source_id = record.at("source_id").get<std::string>();
            generation.model = model;
            generation.response_id =
                record.value("id", generation.source_id + "::cand::" + model);
            generation.text = record.at("text").get<std::string>();
            generation.refusal = detect_refusal(generation.text);
            records[generation.source_id] = std::move(generation);
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    return records;
}

std::string generations_to_jsonl(
    const std::map<std::string, GenerationRecord>& records) {
    std::ostringstream os;
    for (const auto& [source_id, record] : records) {
        json line = {
            {"kind", "response"},
            {"id", record.response_id},
            {"source_id", record.source_id},
            {"generator", record.model},
            {"text", record.text},
            {"ok", record.ok},
            {"refusal", record.refusal},
            {"error", record.error},
        };
        os << line.dump() << "\n";
    }
    return os.str();
}

void write_leaderboard_outputs(const RunFile& run, const RunConfig& config,
                               std::ostream& out) {
    save_run_file(run, config.out_dir / "leaderboard_run.json");
    auto entries = build_leaderboard(entries_from_run(run));
    std::vector<std::string> subset_order;
    for (const auto& ref : config.datasets) subset_order.push_back(ref.id);
    std::string markdown =
        render_leaderboard_markdown(entries, subset_order, run.final_run);
    write_file(config.out_dir / "leaderboard.md", markdown);
    write_file(config.out_dir / "leaderboard.csv",
               render_leaderboard_csv(entries, subset_order));
    write_file(config.out_dir / "leaderboard.json",
               render_leaderboard_json(entries, subset_order, run.final_run));
    for (const auto& entry : entries) {
        write_file(config.out_dir / "models" / (entry.model + ".md"),
                   render_model_detail_markdown(entry));
    }
    out << markdown;
}

int cmd_leaderboard(const CommonOptions& options,
                    const ClientFactory& injected, std::ostream& out,
                    std::ostream& err) {
    RunConfig config = parse_config_file(options.config_path);
    apply_overrides(config, options);

    if (options.replay_path) {
        RunFile run = load_run_file(*options.replay_path);
        replay_verdicts(run);
        write_leaderboard_outputs(run, config, out);
        return run.final_run ? kExitOk : kExitCoverage;
    }

    TemplateSet templates = resolve_templates(config);
    LoadedDatasets loaded = load_all(config);
    ClientFactory factory =
        pick_factory(injected, options.mock, loaded.mock_context);

    // candidate responses come from generation backends or pre-generated
    // files (candidates.<model>.path)
    std::vector<std::pair<std::string, std::optional<BackendSpec>>> models;
    for (const auto& spec : config.candidates)
        models.emplace_back(spec.model_name, spec);
    for (const auto& [key, value] : config.raw) {
        if (key.rfind("candidates.", 0) == 0 &&
            key.size() > 11 + 5 &&
            key.substr(key.size() - 5) == ".path") {
            models.emplace_back(key.substr(11, key.size() - 11 - 5),
                                std::nullopt);
        }
    }
    if (models.empty())
        throw ConfigError(
            "no candidates configured (backend.<id>.role = candidate or "
            "candidates.<model>.path)");

    const bool use_detector = config.scorer == "detector";
    if (use_detector && !config.detector)
        throw ConfigError("scorer = detector requires a detector.* block");
    std::unique_ptr<ChatClient> judge_client;
    if (!use_detector) {
        if (config.judges.empty())
            throw ConfigError("scorer = judge requires a judge backend");
        judge_client = factory(config.judges.front());
    }

    DiskCache cache(config.cache_dir);

    RunFile run;
    run.command = "leaderboard";
    run.config = config.raw;
    run.seed = config.seed;
    run.mode = "binary";
    run.flavor = use_detector ? "detector" : "annotated";
    run.template_set_hash = templates.set_hash();
    run.template_version =
        templates.get(PromptFlavor::AnnotatedBinary).version;
    if (!use_detector)
        run.judge_backends.push_back(config.judges.front().id);
    else
        run.judge_backends.push_back(config.detector->id);

    bool all_scored = true;
    for (const auto& [model, backend] : models) {
        std::unique_ptr<ChatClient> generator;
        if (backend) generator = factory(*backend);
        for (const auto& [ref, bundle] : loaded.bundles) {
            auto subset =
                leaderboard_eval_subset(bundle, ref.task, config.subset_cap);
            std::vector<const SourceDocument*> sources;
            for (const auto& entry : subset) sources.push_back(entry.source);

            std::map<std::string, GenerationRecord> by_source;
            if (generator) {
                for (auto& record :
                     generate_candidates(*generator, sources, &cache,
                                         templates))
                    by_source[record.source_id] = std::move(record);
            } else {
                std::filesystem::path path = interpolate_env(
                    config.raw.at("candidates." + model + ".path"));
                if (path.is_relative()) path = config.base_dir / path;
                by_source = generations_from_file(path, model);
            }
            // raw generations are persisted before any scoring happens
            write_file(config.out_dir / "generations" / model /
                           (ref.id + ".jsonl"),
                       generations_to_jsonl(by_source));

            if (use_detector) {
                std::vector<std::pair<std::string, std::string>> pairs;
                std::vector<const GenerationRecord*> scored_records;
                for (const auto& entry : subset) {
                    auto it = by_source.find(entry.source->id);
                    RunItem item;
                    item.subset = ref.id;
                    item.source_id = entry.source->id;
                    item.model = model;
                    if (it == by_source.end() || !it->second.ok) {
                        item.scored = false;
                        item.error = it == by_source.end()
                                         ? "no candidate generated"
                                         : it->second.error;
                        all_scored = false;
                        run.items.push_back(std::move(item));
                        continue;
                    }
                    item.response_id = it->second.response_id;
                    item.candidate_text = it->second.text;
                    item.refusal = it->second.refusal;
                    if (it->second.refusal) {
                        // a refusal never reaches the detector and never
                        // counts as hallucinated in this flow
                        item.excluded = true;
                        item.klass = "Consistent";
                        run.items.push_back(std::move(item));
                        continue;
                    }
                    pairs.emplace_back(entry.source->context,
                                       it->second.text);
                    scored_records.push_back(&it->second);
                    run.items.push_back(std::move(item));
                }
                auto flags = score_with_detector(*config.detector, pairs);
                std::size_t flag_index = 0;
                for (auto& item : run.items) {
                    if (item.subset != ref.id || item.model != model)
                        continue;
                    if (!item.scored || item.excluded ||
                        !item.klass.empty())
                        continue;
                    const auto& flag = flags.at(flag_index++);
                    item.klass =
                        flag.hallucinated ? "Inconsistent" : "Consistent";
                    char score_buf[32];
                    std::snprintf(score_buf, sizeof(score_buf), "%.6f",
                                  flag.score);
                    item.votes.push_back({config.detector->id, score_buf,
                                          item.klass, false, true});
                }
            } else {
                auto scores = score_subset_with_judge(
                    subset, by_source, *judge_client, &cache, templates);
                for (auto& score : scores) {
                    RunItem item;
                    item.subset = ref.id;
                    item.source_id = score.source_id;
                    item.response_id = score.response_id;
                    item.model = model;
                    item.refusal = score.refusal;
                    item.scored = score.scored;
                    item.error = score.error;
                    item.prompt_hash = score.prompt_hash;
                    item.example_count = score.example_count;
                    auto it = by_source.find(score.source_id);
                    if (it != by_source.end())
                        item.candidate_text = it->second.text;
                    if (score.scored) {
                        item.klass = score.klass;
                        item.invalid = score.invalid;
                        item.parse_ok = score.parse_ok;
                        item.votes.push_back(
                            {run.judge_backends.front(), score.raw,
                             score.klass, score.invalid, score.parse_ok});
                    } else {
                        all_scored = false;
                    }
                    run.items.push_back(std::move(item));
                }
            }
        }
    }

    run.final_run = all_scored;
    write_leaderboard_outputs(run, config, out);
    if (!all_scored) {
        err << "coverage below 100%; leaderboard marked preliminary\n";
        return kExitCoverage;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------
// sweep command
// ---------------------------------------------------------------------

int cmd_sweep(const CommonOptions& options, const ClientFactory& injected,
              std::ostream& out, std::ostream& err) {
    RunConfig config = parse_config_file(options.config_path);
    apply_overrides(config, options);
    if (config.sweep_ks.empty())
        throw ConfigError("sweep needs sweep_ks (e.g. sweep_ks = 0,1,3,9)");
    TemplateSet templates = resolve_templates(config);
    LoadedDatasets loaded = load_all(config);
    if (config.judges.empty())
        throw ConfigError("sweep needs a judge backend");
    ClientFactory factory =
        pick_factory(injected, options.mock, loaded.mock_context);
    auto client = factory(config.judges.front());
    DiskCache cache(config.cache_dir);

    const auto& [ref, bundle] = loaded.bundles.front();
    std::filesystem::create_directories(config.out_dir);
    std::ofstream partial(config.out_dir / "sweep_rows.jsonl",
                          std::ios::binary | std::ios::trunc);
    auto on_row = [&](const SweepRow& row) {
        json line = {{"k", row.k},
                     {"sensitivity", row.sensitivity},
                     {"specificity", row.specificity},
                     {"self_inclusive", row.self_inclusive},
                     {"n_scored", row.n_scored}};
        partial << line.dump() << "\n";
        partial.flush();
    };
    std::vector<SweepRow> rows;
    try {
        rows = example_count_sweep(bundle, *client, config.sweep_ks,
                                   config.seed, &cache, templates, on_row);
    } catch (const BackendError& e) {
        err << "sweep aborted: " << e.what()
            << " (partial rows persisted to sweep_rows.jsonl)\n";
        return kExitBackend;
    }
    std::string markdown = render_sweep_markdown(rows);
    write_file(config.out_dir / "sweep.md", markdown);
    write_file(config.out_dir / "sweep.csv", render_sweep_csv(rows));
    write_file(config.out_dir / "sweep.json", render_sweep_json(rows));
    out << markdown;
    return kExitOk;
}

// ---------------------------------------------------------------------
// report command
// ---------------------------------------------------------------------

std::vector<LeaderboardEntry> entries_from_tallies_json(
    const json& root, std::vector<std::string>& subset_order) {
    for (const auto& subset :
         root.value("subset_order", json::array()))
        subset_order.push_back(subset.get<std::string>());
    std::vector<LeaderboardEntry> entries;
    for (const auto& [model, body] : root.at("models").items()) {
        LeaderboardEntry entry;
        entry.model = model;
        for (const auto& [subset, tally] : body.at("per_subset").items()) {
            SubsetTally counts;
            counts.hallucinated_or_invalid =
                tally.at("hallucinated_or_invalid").get<std::size_t>();
            counts.total = tally.at("total").get<std::size_t>();
            entry.per_subset[subset] = counts;
        }
        entry.refusals = body.value("refusals", std::size_t{0});
        entries.push_back(std::move(entry));
    }
    return entries;
}

int cmd_report(const std::string& run_path, const std::string& tallies_path,
               const std::vector<std::string>& cross_judge_paths,
               const std::string& out_dir, std::ostream& out) {
    std::filesystem::path out_base = out_dir.empty() ? "out" : out_dir;
    if (!tallies_path.empty()) {
        std::ifstream in(tallies_path, std::ios::binary);
        if (!in) throw UsageError("cannot read " + tallies_path);
        json root = json::parse(in);
        std::vector<std::string> subset_order;
        auto entries = build_leaderboard(
            entries_from_tallies_json(root, subset_order));
        std::string markdown =
            render_leaderboard_markdown(entries, subset_order);
        write_file(out_base / "leaderboard.md", markdown);
        write_file(out_base / "leaderboard.csv",
                   render_leaderboard_csv(entries, subset_order));
        write_file(out_base / "leaderboard.json",
                   render_leaderboard_json(entries, subset_order));
        out << markdown;
        return kExitOk;
    }
    if (!cross_judge_paths.empty()) {
        std::vector<JudgeRunSummary> summaries;
        for (const auto& path : cross_judge_paths)
            summaries.push_back(summarize_run(load_run_file(path)));
        auto report = cross_judge_report(summaries);
        std::string markdown = render_cross_judge_markdown(report);
        write_file(out_base / "cross_judge.md", markdown);
        write_file(out_base / "cross_judge.json",
                   render_cross_judge_json(report));
        out << markdown;
        return kExitOk;
    }
    if (!run_path.empty()) {
        RunFile run = load_run_file(run_path);
        if (run.command == "leaderboard") {
            auto entries = build_leaderboard(entries_from_run(run));
            std::string markdown =
                render_leaderboard_markdown(entries, {}, run.final_run);
            write_file(out_base / "leaderboard.md", markdown);
            write_file(out_base / "leaderboard.csv",
                       render_leaderboard_csv(entries));
            write_file(out_base / "leaderboard.json",
                       render_leaderboard_json(entries, {}, run.final_run));
            out << markdown;
        } else {
            MetricReport report = metrics_from_run(run);
            write_file(out_base / "metrics.json",
                       render_metric_report_json(report));
            out << render_metric_report_text(report) << "\n";
        }
        return kExitOk;
    }
    throw UsageError("report needs --run, --tallies or --cross-judge");
}

}  // namespace

int run(const std::vector<std::string>& args, const ClientFactory& factory,
        std::ostream& out, std::ostream& err) {
    CLI::App app{"faithfulness evaluation harness"};
    app.require_subcommand(1);

    CommonOptions options;
    std::string report_run;
    std::string report_tallies;
    std::vector<std::string> report_cross;
    std::string report_out;
    std::string replay_run;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* config_opt =
            cmd->add_option("--config", options.config_path, "config file");
        if (needs_config) config_opt->required();
        cmd->add_flag("--mock", options.mock,
                      "use deterministic in-process mock backends");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { options.out_dir = v; },
            "output directory override");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { options.seed = v; },
            "seed override");
    };

    auto* validate_cmd =
        app.add_subcommand("validate", "load datasets and check invariants");
    add_common(validate_cmd);

    auto* judge_cmd = app.add_subcommand(
        "judge", "judge annotated responses and report metrics");
    add_common(judge_cmd);
    judge_cmd->add_option_function<std::string>(
        "--replay", [&](const std::string& v) { options.replay_path = v; },
        "re-score from a persisted run file (no backend calls)");

    auto* leaderboard_cmd = app.add_subcommand(
        "leaderboard", "generate, judge and rank candidate models");
    add_common(leaderboard_cmd);
    leaderboard_cmd->add_option_function<std::string>(
        "--replay", [&](const std::string& v) { options.replay_path = v; },
        "re-score from a persisted run file (no backend calls)");

    auto* sweep_cmd = app.add_subcommand(
        "sweep", "sensitivity/specificity vs example count");
    add_common(sweep_cmd);

    auto* replay_cmd = app.add_subcommand(
        "replay", "recompute a run file's verdicts and reports");
    add_common(replay_cmd);
    replay_cmd->add_option("--run", replay_run, "run file")->required();

    auto* report_cmd = app.add_subcommand(
        "report", "render reports from run files or injected tallies");
    report_cmd->add_option("--run", report_run, "run file");
    report_cmd->add_option("--tallies", report_tallies,
                           "per-subset tallies JSON");
    report_cmd->add_option("--cross-judge", report_cross,
                           "run files, one per judge");
    report_cmd->add_option("--out", report_out, "output directory");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(std::move(argv));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(validate_cmd))
            return cmd_validate(options, out, err);
        if (app.got_subcommand(judge_cmd))
            return cmd_judge(options, factory, out, err);
        if (app.got_subcommand(leaderboard_cmd))
            return cmd_leaderboard(options, factory, out, err);
        if (app.got_subcommand(sweep_cmd))
            return cmd_sweep(options, factory, out, err);
        if (app.got_subcommand(replay_cmd)) {
            options.replay_path = replay_run;
            RunFile run = load_run_file(replay_run);
            if (run.command == "leaderboard")
                return cmd_leaderboard(options, factory, out, err);
            return cmd_judge(options, factory, out, err);
        }
        if (app.got_subcommand(report_cmd))
            return cmd_report(report_run, report_tallies, report_cross,
                              report_out, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CorpusError& e) {
        err << "corpus error: " << e.what() << "\n";
        return kExitCorpus;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const DetectorError& e) {
        err << "detector error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace faitheval::cli
