#include "faitheval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace faitheval {

using nlohmann::json;

namespace {

std::vector<std::string> resolve_subset_order(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order) {
    if (!subset_order.empty()) return subset_order;
    std::set<std::string> subsets;
    for (const auto& entry : entries)
        for (const auto& [subset, tally] : entry.per_subset)
            subsets.insert(subset);
    return {subsets.begin(), subsets.end()};
}

std::string tie_note(const std::vector<LeaderboardEntry>& entries) {
    std::ostringstream os;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].overall_rate == entries[i - 1].overall_rate) {
            os << "Note: " << entries[i - 1].model << " and "
               << entries[i].model
               << " have identical overall rates; ranks "
               << entries[i - 1].rank << " and " << entries[i].rank
               << " are ordered by model name.\n";
        }
    }
    return os.str();
}

std::string one_decimal(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", round_percent(value));
    return buf;
}

}  // namespace

std::string format_rate(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%",
                  std::floor(percent * 100.0 + 0.5) / 100.0);
    return buf;
}

std::string render_leaderboard_markdown(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order, bool final_run) {
    auto subsets = resolve_subset_order(entries, std::move(subset_order));
    std::ostringstream os;
    os << "# Hallucination leaderboard\n\n";
    if (!final_run)
        os << "**PRELIMINARY: coverage below 100%, not a final ranking.**"
           << "\n\n";
    os << "| Rank | Model | Overall Hallucination Rate | Refusals |";
    for (const auto& subset : subsets) os << " " << subset << " |";
    os << "\n";
    os << "|---:|---|---:|---:|";
    for (std::size_t i = 0; i < subsets.size(); ++i) os << "---|";
    os << "\n";
    for (const auto& entry : entries) {
        os << "| " << entry.rank << " | " << entry.model << " | "
           << format_rate(entry.overall_rate) << " | " << entry.refusals
           << " |";
        for (const auto& subset : subsets) {
            auto it = entry.per_subset.find(subset);
            if (it == entry.per_subset.end()) {
                os << " - |";
            } else {
                os << " " << it->second.hallucinated_or_invalid << "/"
                   << it->second.total << " |";
            }
        }
        os << "\n";
    }
    std::string note = tie_note(entries);
    if (!note.empty()) os << "\n" << note;
    return os.str();
}

std::string render_leaderboard_csv(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order) {
    auto subsets = resolve_subset_order(entries, std::move(subset_order));
    std::ostringstream os;
    os << "rank,model,overall_rate_percent,refusals";
    for (const auto& subset : subsets)
        os << "," << subset << "_hallucinated," << subset << "_total";
    os << "\n";
    for (const auto& entry : entries) {
        char rate[32];
        std::snprintf(rate, sizeof(rate), "%.6f", entry.overall_rate);
        os << entry.rank << "," << entry.model << "," << rate << ","
           << entry.refusals;
        for (const auto& subset : subsets) {
            auto it = entry.per_subset.find(subset);
            if (it == entry.per_subset.end()) {
                os << ",,";
            } else {
                os << "," << it->second.hallucinated_or_invalid << ","
                   << it->second.total;
            }
        }
        os << "\n";
    }
    return os.str();
}

std::string render_leaderboard_json(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order, bool final_run) {
    auto subsets = resolve_subset_order(entries, std::move(subset_order));
    json rows = json::array();
    for (const auto& entry : entries) {
        json per_subset;
        for (const auto& [subset, tally] : entry.per_subset) {
            per_subset[subset] = {
                {"hallucinated_or_invalid", tally.hallucinated_or_invalid},
                {"total", tally.total},
            };
        }
        rows.push_back({
            {"rank", entry.rank},
            {"model", entry.model},
            {"overall_rate_percent", entry.overall_rate},
            {"overall_rate_display", format_rate(entry.overall_rate)},
            {"refusals", entry.refusals},
            {"per_subset", std::move(per_subset)},
        });
    }
    json out = {
        {"subset_order", subsets},
        {"final", final_run},
        {"entries", std::move(rows)},
    };
    return out.dump(2) + "\n";
}

std::string render_model_detail_markdown(const LeaderboardEntry& entry) {
    std::ostringstream os;
    os << "# " << entry.model << "\n\n";
    os << "Rank " << entry.rank << ", overall hallucination rate "
       << format_rate(entry.overall_rate) << " ("
       << entry.hallucinated_total() << "/" << entry.response_total()
       << "), " << entry.refusals << " refusal(s).\n\n";
    os << "| Subset | Hallucinated or invalid | Total |\n";
    os << "|---|---:|---:|\n";
    for (const auto& [subset, tally] : entry.per_subset) {
        os << "| " << subset << " | " << tally.hallucinated_or_invalid
           << " | " << tally.total << " |\n";
    }
    return os.str();
}

std::string render_metric_report_text(const MetricReport& report) {
    std::ostringstream os;
    os << "balanced accuracy " << one_decimal(report.balanced_accuracy)
       << ", F1-macro " << one_decimal(report.f1_macro) << ", sensitivity "
       << one_decimal(report.sensitivity) << ", specificity "
       << one_decimal(report.specificity) << " (" << report.n_scored
       << " scored, " << report.parse_fallbacks << " parse fallback(s))";
    return os.str();
}

std::string render_metric_report_json(const MetricReport& report) {
    json out = {
        {"balanced_accuracy", report.balanced_accuracy},
        {"f1_macro", report.f1_macro},
        {"sensitivity", report.sensitivity},
        {"specificity", report.specificity},
        {"balanced_accuracy_rounded", round_percent(report.balanced_accuracy)},
        {"f1_macro_rounded", round_percent(report.f1_macro)},
        {"sensitivity_rounded", round_percent(report.sensitivity)},
        {"specificity_rounded", round_percent(report.specificity)},
        {"n_scored", report.n_scored},
        {"parse_fallbacks", report.parse_fallbacks},
    };
    return out.dump(2) + "\n";
}

std::string render_confusion_markdown(const ConfusionMatrix& matrix) {
    std::ostringstream os;
    os << "| Gold |";
    for (const auto& pred : matrix.pred_domain()) os << " " << pred << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < matrix.pred_domain().size(); ++i)
        os << "---:|";
    os << "\n";
    for (const auto& gold : matrix.gold_domain()) {
        os << "| " << gold << " |";
        for (const auto& pred : matrix.pred_domain())
            os << " " << matrix.at(gold, pred) << " |";
        os << "\n";
    }
    return os.str();
}

std::string render_confusion_json(const ConfusionMatrix& matrix) {
    json counts;
    for (const auto& gold : matrix.gold_domain())
        for (const auto& pred : matrix.pred_domain())
            counts[gold][pred] = matrix.at(gold, pred);
    json out = {
        {"gold_domain", matrix.gold_domain()},
        {"pred_domain", matrix.pred_domain()},
        {"counts", std::move(counts)},
    };
    return out.dump(2) + "\n";
}

std::string render_sweep_markdown(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "| k | Sensitivity | Specificity | n |\n";
    os << "|---:|---:|---:|---:|\n";
    for (const auto& row : rows) {
        os << "| " << row.k << (row.self_inclusive ? "*" : "") << " | "
           << one_decimal(row.sensitivity) << " | "
           << one_decimal(row.specificity) << " | " << row.n_scored
           << " |\n";
    }
    bool any_self = std::any_of(rows.begin(), rows.end(),
                                [](const SweepRow& row) {
                                    return row.self_inclusive;
                                });
    if (any_self)
        os << "\n\\* the judge saw annotations for the response it was "
              "evaluating (k reached the full peer pool).\n";
    return os.str();
}

std::string render_sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "k,sensitivity_percent,specificity_percent,self_inclusive,"
          "n_scored\n";
    for (const auto& row : rows) {
        char sens[32], spec[32];
        std::snprintf(sens, sizeof(sens), "%.6f", row.sensitivity);
        std::snprintf(spec, sizeof(spec), "%.6f", row.specificity);
        os << row.k << "," << sens << "," << spec << ","
           << (row.self_inclusive ? "true" : "false") << "," << row.n_scored
           << "\n";
    }
    return os.str();
}

std::string render_sweep_json(const std::vector<SweepRow>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        out.push_back({
            {"k", row.k},
            {"sensitivity", row.sensitivity},
            {"specificity", row.specificity},
            {"self_inclusive", row.self_inclusive},
            {"n_scored", row.n_scored},
        });
    }
    return out.dump(2) + "\n";
}

std::string render_cross_judge_markdown(const CrossJudgeReport& report) {
    std::ostringstream os;
    os << "| Evaluated model |";
    for (const auto& judge : report.judges)
        os << " judged by " << judge << " | rank |";
    os << "\n|---|";
    for (std::size_t i = 0; i < report.judges.size(); ++i) os << "---:|---:|";
    os << "\n";
    for (const auto& model : report.models) {
        os << "| " << model << " |";
        for (const auto& judge : report.judges) {
            const auto& cell = report.cells.at(judge).at(model);
            os << " " << cell.total << (cell.self_judgment ? " (self)" : "")
               << " | " << cell.rank << " |";
        }
        os << "\n";
    }
    return os.str();
}

std::string render_cross_judge_json(const CrossJudgeReport& report) {
    json cells;
    for (const auto& [judge, row] : report.cells) {
        for (const auto& [model, cell] : row) {
            cells[judge][model] = {
                {"total", cell.total},
                {"rank", cell.rank},
                {"self_judgment", cell.self_judgment},
            };
        }
    }
    json out = {
        {"judges", report.judges},
        {"models", report.models},
        {"cells", std::move(cells)},
    };
    return out.dump(2) + "\n";
}

}  // namespace faitheval
