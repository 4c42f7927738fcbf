#include <benchmark/benchmark.h>

#include <random>

#include "faitheval/corpus.hpp"
#include "faitheval/judge.hpp"
#include "faitheval/metrics.hpp"
#include "faitheval/promptkit.hpp"

namespace {

using namespace faitheval;

DatasetBundle make_bundle(std::size_t peer_count) {
    DatasetBundle bundle;
    SourceDocument source;
    source.id = "src-0";
    source.context =
        "The plant in the story produced a widely discussed chemical and "
        "was moved after a public backlash over pollution concerns. Six "
        "people were hurt when a storage facility caught fire overnight.";
    source.dataset_tag = "bench";
    bundle.sources[source.id] = source;
    for (std::size_t i = 0; i < peer_count + 1; ++i) {
        AnnotatedResponse response;
        response.id = "resp-" + std::to_string(i);
        response.source_id = source.id;
        response.generator = "model-" + std::to_string(i % 4);
        response.text =
            "A fire at the plant hurt six people after a storage facility "
            "failed overnight; the site had moved after earlier protests.";
        response.annotator_labels = {i % 3 == 0
                                         ? HallucinationLabel::Unwanted
                                         : HallucinationLabel::Consistent};
        if (i % 3 == 0)
            response.spans.push_back(
                {2, 6, HallucinationLabel::Unwanted, std::nullopt,
                 std::nullopt});
        response.gold = pool_gold_label(response.annotator_labels);
        if (*response.gold == HallucinationLabel::Consistent)
            response.spans.clear();
        bundle.responses[response.id] = response;
    }
    return bundle;
}

void BM_PoolGoldLabel(benchmark::State& state) {
    std::vector<HallucinationLabel> labels = {
        HallucinationLabel::Unwanted, HallucinationLabel::Questionable,
        HallucinationLabel::Consistent, HallucinationLabel::Benign,
        HallucinationLabel::Unwanted};
    for (auto _ : state) {
        benchmark::DoNotOptimize(pool_gold_label(labels));
    }
}
BENCHMARK(BM_PoolGoldLabel);

void BM_BuildAnnotatedPrompt(benchmark::State& state) {
    auto bundle = make_bundle(static_cast<std::size_t>(state.range(0)));
    const auto& target = bundle.responses.at("resp-0");
    const auto& source = bundle.sources.at("src-0");
    std::vector<const AnnotatedResponse*> peers;
    for (const auto* peer : bundle.responses_for(source.id))
        if (peer->id != target.id) peers.push_back(peer);
    for (auto _ : state) {
        auto prompt = build_annotated_judge_prompt(target, peers, source);
        benchmark::DoNotOptimize(prompt.content_hash);
    }
}
BENCHMARK(BM_BuildAnnotatedPrompt)->Arg(3)->Arg(9)->Arg(30);

void BM_ParseVerdict(benchmark::State& state) {
    std::string raw =
        "The response changes several details from the source, including "
        "the location of the plant and the number of people hurt.\n\n"
        "Final classification: Inconsistent\n";
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_verdict(raw, JudgeMode::Binary));
    }
}
BENCHMARK(BM_ParseVerdict);

void BM_BinaryMetrics(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 1000; ++i) {
        pairs.emplace_back(rng() % 2 ? "Unwanted" : "Consistent",
                           rng() % 2 ? "Inconsistent" : "Consistent");
    }
    for (auto _ : state) {
        auto matrix = confusion(pairs, {"Unwanted", "Consistent"},
                                {"Consistent", "Inconsistent"});
        benchmark::DoNotOptimize(binary_metrics(matrix));
    }
}
BENCHMARK(BM_BinaryMetrics);

}  // namespace

BENCHMARK_MAIN();
