#pragma once

#include <string>
#include <vector>

#include "faitheval/leaderboard.hpp"
#include "faitheval/metrics.hpp"

namespace faitheval {

/// Subset column order for leaderboard tables. Pass the config order to
/// mirror a specific layout; an empty list means sorted subset ids.
std::string render_leaderboard_markdown(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order = {}, bool final_run = true);

std::string render_leaderboard_csv(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order = {});

std::string render_leaderboard_json(
    const std::vector<LeaderboardEntry>& entries,
    std::vector<std::string> subset_order = {}, bool final_run = true);

std::string render_model_detail_markdown(const LeaderboardEntry& entry);

std::string render_metric_report_text(const MetricReport& report);
std::string render_metric_report_json(const MetricReport& report);

std::string render_confusion_markdown(const ConfusionMatrix& matrix);
std::string render_confusion_json(const ConfusionMatrix& matrix);

std::string render_sweep_markdown(const std::vector<SweepRow>& rows);
std::string render_sweep_csv(const std::vector<SweepRow>& rows);
std::string render_sweep_json(const std::vector<SweepRow>& rows);

std::string render_cross_judge_markdown(const CrossJudgeReport& report);
std::string render_cross_judge_json(const CrossJudgeReport& report);

/// Two-decimal percent string used by leaderboard rates (e.g. "6.65%").
std::string format_rate(double percent);

}  // namespace faitheval
