#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "faitheval/metrics.hpp"
#include "helpers.hpp"

using namespace faitheval;
using testutil::fixture_path;

namespace {

// Independent metric oracle, written from the definitions (per-class
// recall/precision, F1 as the harmonic mean) rather than the collapsed
// 2TP/(2TP+FP+FN) form the implementation uses.
struct OracleResult {
    double balanced_accuracy;
    double f1_macro;
    double sensitivity;
    double specificity;
};

OracleResult metric_oracle(double tp, double fn, double fp, double tn) {
    double recall_pos = tp / (tp + fn);
    double recall_neg = tn / (tn + fp);
    double precision_pos = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    double precision_neg = (tn + fn) > 0 ? tn / (tn + fn) : 0.0;
    auto f1 = [](double precision, double recall) {
        return (precision + recall) > 0
                   ? 2.0 * precision * recall / (precision + recall)
                   : 0.0;
    };
    OracleResult out;
    out.sensitivity = 100.0 * recall_pos;
    out.specificity = 100.0 * recall_neg;
    out.balanced_accuracy = (out.sensitivity + out.specificity) / 2.0;
    out.f1_macro =
        100.0 * (f1(precision_pos, recall_pos) +
                 f1(precision_neg, recall_neg)) / 2.0;
    return out;
}

ConfusionMatrix table_matrix(std::uint64_t unwanted_consistent,
                             std::uint64_t unwanted_inconsistent,
                             std::uint64_t consistent_consistent,
                             std::uint64_t consistent_inconsistent) {
    ConfusionMatrix matrix(
        {"Unwanted", "Questionable", "Benign", "Consistent"},
        {"Consistent", "Inconsistent"});
    matrix.add("Unwanted", "Consistent", unwanted_consistent);
    matrix.add("Unwanted", "Inconsistent", unwanted_inconsistent);
    matrix.add("Questionable", "Consistent", 29);
    matrix.add("Questionable", "Inconsistent", 38);
    matrix.add("Benign", "Consistent", 50);
    matrix.add("Benign", "Inconsistent", 34);
    matrix.add("Consistent", "Consistent", consistent_consistent);
    matrix.add("Consistent", "Inconsistent", consistent_inconsistent);
    return matrix;
}

}  // namespace

TEST_CASE("confusion tallies pairs exactly and rejects out-of-domain "
          "values") {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"Unwanted", "Inconsistent"}};
    auto matrix = confusion(pairs, {"Unwanted", "Consistent"},
                            {"Consistent", "Inconsistent"});
    CHECK(matrix.at("Unwanted", "Inconsistent") == 1);
    CHECK(matrix.at("Unwanted", "Consistent") == 0);
    CHECK(matrix.total() == 1);

    auto empty = confusion({}, {"Unwanted", "Consistent"},
                           {"Consistent", "Inconsistent"});
    CHECK(empty.total() == 0);

    CHECK_THROWS_AS(matrix.at("Martian", "Consistent"), MetricsError);
    pairs.push_back({"Unwanted", "Martian"});
    CHECK_THROWS_AS(confusion(pairs, {"Unwanted", "Consistent"},
                              {"Consistent", "Inconsistent"}),
                    MetricsError);
}

TEST_CASE("reference binary confusion counts reproduce the published "
          "metrics") {
    // replayed stored-verdict counts: gold Unwanted row 74/322, gold
    // Consistent row 176/27, Benign and Questionable rows excluded in
    // strict mode
    auto matrix = table_matrix(74, 322, 176, 27);
    auto report = binary_metrics(matrix, "Inconsistent",
                                 GoldPolicy::StrictBinary);
    auto oracle = metric_oracle(322, 74, 27, 176);
    CHECK(report.balanced_accuracy ==
          doctest::Approx(oracle.balanced_accuracy).epsilon(1e-12));
    CHECK(report.f1_macro == doctest::Approx(oracle.f1_macro).epsilon(1e-12));
    CHECK(round_percent(report.balanced_accuracy) == 84.0);
    CHECK(round_percent(report.f1_macro) == 82.1);
    CHECK(std::abs(report.balanced_accuracy - 84.0) < 0.05);
    CHECK(std::abs(report.f1_macro - 82.1) < 0.05);
    CHECK(report.n_scored == 74 + 322 + 176 + 27);
}

TEST_CASE("include-all mode pools Benign and Questionable into the "
          "positive class") {
    auto matrix = table_matrix(74, 322, 176, 27);
    auto strict = binary_metrics(matrix, "Inconsistent",
                                 GoldPolicy::StrictBinary);
    auto all = binary_metrics(matrix, "Inconsistent",
                              GoldPolicy::IncludeAll);
    auto oracle = metric_oracle(322 + 38 + 34, 74 + 29 + 50, 27, 176);
    CHECK(all.sensitivity ==
          doctest::Approx(oracle.sensitivity).epsilon(1e-12));
    CHECK(all.f1_macro == doctest::Approx(oracle.f1_macro).epsilon(1e-12));
    CHECK(all.n_scored == strict.n_scored + 29 + 38 + 50 + 34);
}

TEST_CASE("perfect classifier scores 100 everywhere") {
    ConfusionMatrix matrix({"Unwanted", "Consistent"},
                           {"Consistent", "Inconsistent"});
    matrix.add("Unwanted", "Inconsistent", 40);
    matrix.add("Consistent", "Consistent", 60);
    auto report = binary_metrics(matrix);
    CHECK(report.balanced_accuracy == doctest::Approx(100.0));
    CHECK(report.f1_macro == doctest::Approx(100.0));
}

TEST_CASE("binary metrics agree with the brute-force oracle on 1000+ "
          "random matrices") {
    std::mt19937_64 rng(20240811);
    std::uniform_int_distribution<std::uint64_t> cell(0, 400);
    std::size_t checked = 0;
    while (checked < 1200) {
        std::uint64_t tp = cell(rng), fn = cell(rng), fp = cell(rng),
                      tn = cell(rng);
        if (tp + fn == 0 || fp + tn == 0) continue;  // degenerate by design
        ConfusionMatrix matrix({"Unwanted", "Consistent"},
                               {"Consistent", "Inconsistent"});
        matrix.add("Unwanted", "Inconsistent", tp);
        matrix.add("Unwanted", "Consistent", fn);
        matrix.add("Consistent", "Inconsistent", fp);
        matrix.add("Consistent", "Consistent", tn);
        auto report = binary_metrics(matrix);
        auto oracle = metric_oracle(static_cast<double>(tp),
                                    static_cast<double>(fn),
                                    static_cast<double>(fp),
                                    static_cast<double>(tn));
        CHECK(std::abs(report.balanced_accuracy -
                       oracle.balanced_accuracy) < 1e-9);
        CHECK(std::abs(report.f1_macro - oracle.f1_macro) < 1e-9);
        CHECK(std::abs(report.sensitivity - oracle.sensitivity) < 1e-9);
        CHECK(std::abs(report.specificity - oracle.specificity) < 1e-9);
        CHECK(report.balanced_accuracy >= 0.0);
        CHECK(report.balanced_accuracy <= 100.0);
        CHECK(report.f1_macro >= 0.0);
        CHECK(report.f1_macro <= 100.0);
        ++checked;
    }
}

TEST_CASE("scaling every cell leaves balanced accuracy and F1-macro "
          "unchanged") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::uint64_t> cell(0, 50);
    for (int round = 0; round < 200; ++round) {
        std::uint64_t tp = cell(rng) + 1, fn = cell(rng), fp = cell(rng),
                      tn = cell(rng) + 1;
        for (std::uint64_t scale : {2ull, 7ull, 100ull}) {
            ConfusionMatrix base({"Unwanted", "Consistent"},
                                 {"Consistent", "Inconsistent"});
            base.add("Unwanted", "Inconsistent", tp);
            base.add("Unwanted", "Consistent", fn);
            base.add("Consistent", "Inconsistent", fp);
            base.add("Consistent", "Consistent", tn);
            ConfusionMatrix scaled({"Unwanted", "Consistent"},
                                   {"Consistent", "Inconsistent"});
            scaled.add("Unwanted", "Inconsistent", tp * scale);
            scaled.add("Unwanted", "Consistent", fn * scale);
            scaled.add("Consistent", "Inconsistent", fp * scale);
            scaled.add("Consistent", "Consistent", tn * scale);
            auto a = binary_metrics(base);
            auto b = binary_metrics(scaled);
            CHECK(std::abs(a.balanced_accuracy - b.balanced_accuracy) <
                  1e-9);
            CHECK(std::abs(a.f1_macro - b.f1_macro) < 1e-9);
        }
    }
}

TEST_CASE("swapping class roles preserves balanced accuracy and "
          "F1-macro") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::uint64_t> cell(1, 80);
    for (int round = 0; round < 200; ++round) {
        std::uint64_t tp = cell(rng), fn = cell(rng), fp = cell(rng),
                      tn = cell(rng);
        ConfusionMatrix matrix({"Consistent", "Inconsistent"},
                               {"Consistent", "Inconsistent"});
        matrix.add("Inconsistent", "Inconsistent", tp);
        matrix.add("Inconsistent", "Consistent", fn);
        matrix.add("Consistent", "Inconsistent", fp);
        matrix.add("Consistent", "Consistent", tn);
        auto positive = binary_metrics(matrix, "Inconsistent",
                                       GoldPolicy::Identity);
        auto negative = binary_metrics(matrix, "Consistent",
                                       GoldPolicy::Identity);
        // with the positive role handed to Consistent, sensitivity and
        // specificity trade places and the macro averages are unchanged
        CHECK(std::abs(positive.balanced_accuracy -
                       negative.balanced_accuracy) < 1e-9);
        CHECK(std::abs(positive.f1_macro - negative.f1_macro) < 1e-9);
        CHECK(std::abs(positive.sensitivity - negative.specificity) < 1e-9);
        CHECK(std::abs(positive.specificity - negative.sensitivity) < 1e-9);
    }
}

TEST_CASE("the all-one-class predictor scores balanced accuracy 50") {
    ConfusionMatrix matrix({"Unwanted", "Consistent"},
                           {"Consistent", "Inconsistent"});
    matrix.add("Unwanted", "Inconsistent", 120);
    matrix.add("Consistent", "Inconsistent", 345);
    auto report = binary_metrics(matrix);
    CHECK(report.balanced_accuracy == doctest::Approx(50.0));
}

TEST_CASE("degenerate gold classes raise explicit errors") {
    ConfusionMatrix no_positives({"Unwanted", "Consistent"},
                                 {"Consistent", "Inconsistent"});
    no_positives.add("Consistent", "Consistent", 10);
    CHECK_THROWS_AS(binary_metrics(no_positives), DegenerateMetricError);

    ConfusionMatrix no_negatives({"Unwanted", "Consistent"},
                                 {"Consistent", "Inconsistent"});
    no_negatives.add("Unwanted", "Inconsistent", 10);
    CHECK_THROWS_AS(binary_metrics(no_negatives), DegenerateMetricError);

    ConfusionMatrix ternary_preds({"Unwanted", "Consistent"},
                                  {"Consistent", "Benign", "Unwanted"});
    CHECK_THROWS_AS(binary_metrics(ternary_preds), MetricsError);
}

TEST_CASE("ternary confusion report matches the published row for "
          "Unwanted") {
    std::vector<std::pair<std::string, std::string>> pairs;
    auto repeat = [&](const std::string& gold, const std::string& pred,
                      std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) pairs.emplace_back(gold,
                                                                   pred);
    };
    repeat("Unwanted", "Consistent", 84);
    repeat("Unwanted", "Benign", 18);
    repeat("Unwanted", "Unwanted", 294);
    repeat("Questionable", "Consistent", 28);
    repeat("Benign", "Benign", 10);
    repeat("Consistent", "Consistent", 179);
    auto matrix = ternary_confusion_report(pairs);
    CHECK(matrix.at("Unwanted", "Consistent") == 84);
    CHECK(matrix.at("Unwanted", "Benign") == 18);
    CHECK(matrix.at("Unwanted", "Unwanted") == 294);
    CHECK(matrix.row_total("Unwanted") == 396);
    CHECK(ternary_confusion_report({}).total() == 0);

    std::vector<std::pair<std::string, std::string>> bad = {
        {"Unwanted", "Inconsistent"}};
    CHECK_THROWS_AS(ternary_confusion_report(bad), MetricsError);
}

TEST_CASE("rounding is half-up to one decimal") {
    CHECK(round_percent(84.0063) == 84.0);
    CHECK(round_percent(82.0736) == 82.1);
    CHECK(round_percent(82.05) == 82.1);
    CHECK(round_percent(0.04999) == 0.0);
    CHECK(round_percent(99.95) == 100.0);
    CHECK(round_percent(0.0) == 0.0);
}

TEST_CASE("score_pairs counts parse fallbacks alongside the metrics") {
    std::vector<ScoredPair> pairs = {
        {"Unwanted", "Inconsistent", false},
        {"Unwanted", "Inconsistent", true},
        {"Consistent", "Consistent", false},
        {"Consistent", "Inconsistent", true},
    };
    auto report = score_pairs(pairs, GoldPolicy::StrictBinary);
    CHECK(report.parse_fallbacks == 2);
    CHECK(report.sensitivity == doctest::Approx(100.0));
    CHECK(report.specificity == doctest::Approx(50.0));
}

TEST_CASE("derive_seed is deterministic and tag-sensitive") {
    CHECK(derive_seed(42, "a") == derive_seed(42, "a"));
    CHECK(derive_seed(42, "a") != derive_seed(42, "b"));
    CHECK(derive_seed(42, "a") != derive_seed(43, "a"));
}

TEST_CASE("example-count sweep: endpoints, monotonicity and the "
          "self-inclusion flag") {
    auto bundle = load_dataset(fixture_path("faithbench_small.json"),
                               DatasetFormat::FaithbenchJson);
    // scripted judge: Inconsistent iff any embedded example is labeled
    // Unwanted (reads the example labels from the prompt metadata)
    MockChatClient client(
        [](const PromptBundle& prompt) -> std::string {
            auto it = prompt.meta.find("example_labels");
            bool any_unwanted =
                it != prompt.meta.end() &&
                it->second.find("Unwanted") != std::string::npos;
            return std::string("Final classification: ") +
                   (any_unwanted ? "Inconsistent" : "Consistent");
        },
        MockChatClient::mock_spec());

    std::vector<SweepRow> seen;
    auto rows = example_count_sweep(
        bundle, client, {10, 0, 1, 3, 9}, 42, nullptr,
        TemplateSet::builtin(),
        [&](const SweepRow& row) { seen.push_back(row); });

    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i - 1].k < rows[i].k);  // output ordered by k
    CHECK(seen.size() == rows.size());

    // k = 0 equals the zero-shot run: no examples, never flagged
    CHECK(rows[0].k == 0);
    CHECK(rows[0].sensitivity == doctest::Approx(0.0));
    CHECK(rows[0].specificity == doctest::Approx(100.0));
    CHECK(!rows[0].self_inclusive);

    // independent expectation at k = 9 (all peers): every source holds
    // three Unwanted summaries, so each target's nine peers contain at
    // least two and the scripted judge flags everything
    auto full_peers = rows[3];
    CHECK(full_peers.k == 9);
    CHECK(full_peers.sensitivity == doctest::Approx(100.0));
    CHECK(full_peers.specificity == doctest::Approx(0.0));

    // the scripted judge only gains Unwanted examples as k grows
    // (sampling is a permutation prefix), so sensitivity never drops
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].sensitivity >= rows[i - 1].sensitivity);

    // k beyond the pool embeds the target itself and flags the row
    CHECK(rows[4].k == 10);
    CHECK(rows[4].self_inclusive);
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        CHECK(!rows[i].self_inclusive);
}

TEST_CASE("sweep aborts on backend errors after persisting earlier rows") {
    auto bundle = load_dataset(fixture_path("faithbench_small.json"),
                               DatasetFormat::FaithbenchJson);
    std::atomic<int> calls{0};
    MockChatClient client(
        [&](const PromptBundle&) -> std::string {
            if (++calls > 30) throw ProtocolError("mock", "scripted outage");
            return "Final classification: Consistent";
        },
        MockChatClient::mock_spec());
    std::vector<std::size_t> persisted;
    CHECK_THROWS_AS(
        example_count_sweep(bundle, client, {0, 1, 9}, 7, nullptr,
                            TemplateSet::builtin(),
                            [&](const SweepRow& row) {
                                persisted.push_back(row.k);
                            }),
        BackendError);
    CHECK(persisted == std::vector<std::size_t>{0});
}
