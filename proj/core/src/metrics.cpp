#include "faitheval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include <spdlog/spdlog.h>

#include "faitheval/hash.hpp"

namespace faitheval {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> gold_domain,
                                 std::vector<std::string> pred_domain)
    : gold_domain_(std::move(gold_domain)),
      pred_domain_(std::move(pred_domain)),
      counts_(gold_domain_.size() * pred_domain_.size(), 0) {
    if (gold_domain_.empty() || pred_domain_.empty())
        throw MetricsError("confusion matrix domains must be non-empty");
}

std::size_t ConfusionMatrix::gold_index(std::string_view gold) const {
    for (std::size_t i = 0; i < gold_domain_.size(); ++i)
        if (gold_domain_[i] == gold) return i;
    throw MetricsError("gold label '" + std::string(gold) +
                       "' outside the declared domain");
}

std::size_t ConfusionMatrix::pred_index(std::string_view pred) const {
    for (std::size_t i = 0; i < pred_domain_.size(); ++i)
        if (pred_domain_[i] == pred) return i;
    throw MetricsError("predicted class '" + std::string(pred) +
                       "' outside the declared domain");
}

void ConfusionMatrix::add(std::string_view gold, std::string_view pred,
                          std::uint64_t count) {
    counts_[gold_index(gold) * pred_domain_.size() + pred_index(pred)] +=
        count;
}

std::uint64_t ConfusionMatrix::at(std::string_view gold,
                                  std::string_view pred) const {
    return counts_[gold_index(gold) * pred_domain_.size() +
                   pred_index(pred)];
}

std::uint64_t ConfusionMatrix::row_total(std::string_view gold) const {
    std::size_t row = gold_index(gold);
    std::uint64_t total = 0;
    for (std::size_t j = 0; j < pred_domain_.size(); ++j)
        total += counts_[row * pred_domain_.size() + j];
    return total;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t total = 0;
    for (auto count : counts_) total += count;
    return total;
}

ConfusionMatrix confusion(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    std::vector<std::string> gold_domain,
    std::vector<std::string> pred_domain) {
    ConfusionMatrix matrix(std::move(gold_domain), std::move(pred_domain));
    for (const auto& [gold, pred] : pairs) matrix.add(gold, pred);
    return matrix;
}

ConfusionMatrix ternary_confusion_report(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
    return confusion(pairs,
                     {"Unwanted", "Questionable", "Benign", "Consistent"},
                     {"Consistent", "Benign", "Unwanted"});
}

double round_percent(double value) {
    return std::floor(value * 10.0 + 0.5) / 10.0;
}

namespace {

struct BinaryCells {
    // rows are gold (positive first), columns predicted (positive first)
    std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
};

BinaryCells collapse(const ConfusionMatrix& matrix,
                     std::string_view positive_class, GoldPolicy policy) {
    if (matrix.pred_domain().size() != 2)
        throw MetricsError("binary metrics need a binary prediction domain");
    const auto& preds = matrix.pred_domain();
    std::string negative_class =
        preds[0] == positive_class ? preds[1] : preds[0];
    if (preds[0] != positive_class && preds[1] != positive_class)
        throw MetricsError("positive class '" + std::string(positive_class) +
                           "' not in the prediction domain");

    auto gold_side = [&](const std::string& gold) -> int {
        // +1 positive row, -1 negative row, 0 excluded
        switch (policy) {
            case GoldPolicy::StrictBinary:
                if (gold == "Unwanted") return 1;
                if (gold == "Consistent") return -1;
                return 0;
            case GoldPolicy::IncludeAll:
                if (gold == "Unwanted" || gold == "Questionable" ||
                    gold == "Benign")
                    return 1;
                if (gold == "Consistent") return -1;
                return 0;
            case GoldPolicy::Identity:
                if (gold == positive_class) return 1;
                if (gold == negative_class) return -1;
                throw MetricsError("gold label '" + gold +
                                   "' not in the prediction domain under "
                                   "the identity policy");
        }
        return 0;
    };

    BinaryCells cells;
    for (const auto& gold : matrix.gold_domain()) {
        int side = gold_side(gold);
        if (side == 0) continue;
        std::uint64_t pred_pos = matrix.at(gold, positive_class);
        std::uint64_t pred_neg = matrix.at(gold, negative_class);
        if (side > 0) {
            cells.tp += pred_pos;
            cells.fn += pred_neg;
        } else {
            cells.fp += pred_pos;
            cells.tn += pred_neg;
        }
    }
    return cells;
}

}  // namespace

MetricReport binary_metrics(const ConfusionMatrix& matrix,
                            std::string_view positive_class,
                            GoldPolicy policy) {
    BinaryCells cells = collapse(matrix, positive_class, policy);
    const std::uint64_t positives = cells.tp + cells.fn;
    const std::uint64_t negatives = cells.fp + cells.tn;
    if (positives == 0)
        throw DegenerateMetricError(
            "no gold items in the positive class; recall is undefined");
    if (negatives == 0)
        throw DegenerateMetricError(
            "no gold items in the negative class; recall is undefined");

    const double sensitivity =
        static_cast<double>(cells.tp) / static_cast<double>(positives);
    const double specificity =
        static_cast<double>(cells.tn) / static_cast<double>(negatives);

    // per-class F1 with the 2TP/(2TP+FP+FN) form; a class never predicted
    // and never gold-present would be 0/0, but both sides are non-empty here
    const double f1_pos =
        static_cast<double>(2 * cells.tp) /
        static_cast<double>(2 * cells.tp + cells.fp + cells.fn);
    const double f1_neg =
        static_cast<double>(2 * cells.tn) /
        static_cast<double>(2 * cells.tn + cells.fn + cells.fp);

    MetricReport report;
    report.sensitivity = 100.0 * sensitivity;
    report.specificity = 100.0 * specificity;
    report.balanced_accuracy = (report.sensitivity + report.specificity) / 2;
    report.f1_macro = 100.0 * (f1_pos + f1_neg) / 2;
    report.n_scored = static_cast<std::size_t>(positives + negatives);
    return report;
}

MetricReport score_pairs(const std::vector<ScoredPair>& pairs,
                         GoldPolicy policy) {
    std::vector<std::pair<std::string, std::string>> gold_pred;
    gold_pred.reserve(pairs.size());
    std::size_t fallbacks = 0;
    std::vector<std::string> gold_domain;
    for (const auto& pair : pairs) {
        gold_pred.emplace_back(pair.gold, pair.pred);
        if (pair.parse_fallback) ++fallbacks;
        if (std::find(gold_domain.begin(), gold_domain.end(), pair.gold) ==
            gold_domain.end())
            gold_domain.push_back(pair.gold);
    }
    std::sort(gold_domain.begin(), gold_domain.end());
    ConfusionMatrix matrix =
        confusion(gold_pred, gold_domain, {"Consistent", "Inconsistent"});
    MetricReport report = binary_metrics(matrix, "Inconsistent", policy);
    report.parse_fallbacks = fallbacks;
    return report;
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view tag) {
    std::string material =
        "fe-seed-v1|" + std::to_string(run_seed) + "|" + std::string(tag);
    std::string digest = sha256_hex(material);
    std::uint64_t seed = 0;
    for (int i = 0; i < 16; ++i) {
        char c = digest[static_cast<std::size_t>(i)];
        seed = (seed << 4) |
               static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
    }
    return seed;
}

std::vector<SweepRow> example_count_sweep(
    const DatasetBundle& bundle, ChatClient& client,
    std::vector<std::size_t> ks, std::uint64_t seed, DiskCache* cache,
    const TemplateSet& templates,
    const std::function<void(const SweepRow&)>& on_row) {
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    auto subset = binary_eval_subset(bundle);
    if (subset.empty())
        throw UsageError("sweep needs a non-empty strict binary subset");

    std::vector<SweepRow> rows;
    for (std::size_t k : ks) {
        std::vector<ScoredPair> pairs;
        bool any_self_included = false;
        for (const auto& example : subset) {
            const auto& target = *example.response;
            const auto& source = bundle.source_of(target);
            std::vector<const AnnotatedResponse*> peers;
            for (const auto* candidate : bundle.responses_for(source.id)) {
                if (candidate->id != target.id && candidate->gold)
                    peers.push_back(candidate);
            }
            AnnotatedPromptOptions options;
            options.mode = JudgeMode::Binary;
            options.max_examples = k;
            options.allow_self_inclusion = k > peers.size();
            options.sample_seed = derive_seed(seed, target.id);
            JudgeOutcome outcome;
            try {
                outcome = judge_response(target, peers, source, client,
                                         options, cache, templates);
            } catch (const BackendError&) {
                // partial rows already handed to on_row survive the abort
                throw;
            }
            any_self_included = any_self_included || outcome.self_included;
            pairs.push_back(
                {std::string(binary_class_name(example.gold)),
                 std::string(verdict_class_name(outcome.verdict.klass)),
                 !outcome.verdict.parse_ok});
        }
        MetricReport report = score_pairs(pairs, GoldPolicy::Identity);
        SweepRow row{k, report.sensitivity, report.specificity,
                     any_self_included, report.n_scored};
        rows.push_back(row);
        if (on_row) on_row(row);
    }
    return rows;
}

}  // namespace faitheval
