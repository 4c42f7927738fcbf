#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "faitheval/corpus.hpp"
#include "faitheval/judge.hpp"

namespace faitheval {

/// Gold-label x predicted-class counts. Domains are ordered label/class
/// name lists; out-of-domain values are hard errors.
class ConfusionMatrix {
public:
    ConfusionMatrix(std::vector<std::string> gold_domain,
                    std::vector<std::string> pred_domain);

    void add(std::string_view gold, std::string_view pred,
             std::uint64_t count = 1);
    std::uint64_t at(std::string_view gold, std::string_view pred) const;
    std::uint64_t row_total(std::string_view gold) const;
    std::uint64_t total() const;

    const std::vector<std::string>& gold_domain() const {
        return gold_domain_;
    }
    const std::vector<std::string>& pred_domain() const {
        return pred_domain_;
    }

private:
    std::size_t gold_index(std::string_view gold) const;
    std::size_t pred_index(std::string_view pred) const;

    std::vector<std::string> gold_domain_;
    std::vector<std::string> pred_domain_;
    std::vector<std::uint64_t> counts_;  // row-major gold x pred
};

ConfusionMatrix confusion(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    std::vector<std::string> gold_domain,
    std::vector<std::string> pred_domain);

/// The standard 4-gold-row x 3-class ternary matrix
/// (gold Unwanted/Questionable/Benign/Consistent, predictions
/// Consistent/Benign/Unwanted).
ConfusionMatrix ternary_confusion_report(
    const std::vector<std::pair<std::string, std::string>>& pairs);

struct MetricReport {
    double balanced_accuracy = 0;  // percent
    double f1_macro = 0;           // percent
    double sensitivity = 0;        // percent, recall of the positive class
    double specificity = 0;        // percent, recall of the negative class
    std::size_t n_scored = 0;
    std::size_t parse_fallbacks = 0;
};

/// How gold rows map onto the binary positive/negative split.
enum class GoldPolicy {
    /// Gold Unwanted is positive, Consistent negative; Benign and
    /// Questionable rows are excluded before computation.
    StrictBinary,
    /// Unwanted, Questionable and Benign all count as positive.
    IncludeAll,
    /// Gold domain already uses the prediction class names.
    Identity,
};

/// Binary metrics over a matrix with a binary prediction domain. The
/// positive class is the hallucinated one, so sensitivity is hallucination
/// recall. A gold side with zero items raises DegenerateMetricError rather
/// than silently reporting 0.
MetricReport binary_metrics(const ConfusionMatrix& matrix,
                            std::string_view positive_class = "Inconsistent",
                            GoldPolicy policy = GoldPolicy::StrictBinary);

/// Reported percentages round half-up to one decimal; raw doubles stay in
/// machine-readable output.
double round_percent(double value);

/// One scored item for report building.
struct ScoredPair {
    std::string gold;
    std::string pred;
    bool parse_fallback = false;
};

/// Convenience: confusion + binary_metrics + fallback tally in one step.
MetricReport score_pairs(const std::vector<ScoredPair>& pairs,
                         GoldPolicy policy);

struct SweepRow {
    std::size_t k = 0;
    double sensitivity = 0;  // percent
    double specificity = 0;  // percent
    bool self_inclusive = false;
    std::size_t n_scored = 0;
};

/// Judges the bundle's strict binary subset once per k with max_examples=k
/// (seeded sampling; k beyond the peer pool self-includes the target and
/// flags the row). Rows are ordered by k and handed to on_row as they
/// complete, so partial results survive an aborted sweep.
std::vector<SweepRow> example_count_sweep(
    const DatasetBundle& bundle, ChatClient& client,
    std::vector<std::size_t> ks, std::uint64_t seed,
    DiskCache* cache = nullptr,
    const TemplateSet& templates = TemplateSet::builtin(),
    const std::function<void(const SweepRow&)>& on_row = {});

/// Deterministic per-target sampling seed, derived from the run seed so a
/// single config seed drives all randomness.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view tag);

}  // namespace faitheval
