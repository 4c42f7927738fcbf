#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faitheval/backend.hpp"
#include "faitheval/cache.hpp"
#include "faitheval/corpus.hpp"
#include "faitheval/promptkit.hpp"

namespace faitheval {

enum class VerdictClass {
    Consistent,
    Benign,
    Unwanted,
    Inconsistent,
};

std::string_view verdict_class_name(VerdictClass klass);
VerdictClass verdict_class_from_name(std::string_view name);

bool class_in_mode(VerdictClass klass, JudgeMode mode);

/// The conservative fallback class for unparseable output and vote ties:
/// Inconsistent in binary mode; Unwanted (its ternary counterpart) in
/// ternary mode, since Inconsistent is not a ternary class.
VerdictClass fallback_class(JudgeMode mode);

struct JudgeVerdict {
    JudgeMode mode = JudgeMode::Binary;
    VerdictClass klass = VerdictClass::Inconsistent;
    bool invalid_response = false;
    std::string rationale;
    std::string raw;
    bool parse_ok = true;
};

/// Extracts the verdict from raw judge output: the last line containing
/// "Final classification: <Class>" wins (case-insensitive). The invalid
/// flag is set by a line "Invalid response: yes". Never throws; an output
/// with no verdict line yields parse_ok = false and the fallback class.
JudgeVerdict parse_verdict(std::string_view raw, JudgeMode mode);

struct Claim {
    std::string text;
    std::size_t sentence_index = 0;
};

struct ClaimSet {
    std::vector<Claim> claims;
    std::string response_id;
};

/// Parses "S<i>.C<j>: claim" lines from decomposition output. Unparseable
/// lines are skipped; an output with no claim lines yields an empty set.
ClaimSet parse_claim_set(std::string_view raw, std::string response_id,
                         std::size_t sentence_count);

struct JudgeOutcome {
    JudgeVerdict verdict;
    std::size_t example_count = 0;
    bool cache_hit = false;
    bool self_included = false;
    std::string prompt_hash;
    std::string template_version;
};

/// Annotated few-shot judgment of one response:
/// build prompt -> complete (cache-first, retried) -> parse.
JudgeOutcome judge_response(
    const AnnotatedResponse& target,
    const std::vector<const AnnotatedResponse*>& peers,
    const SourceDocument& source, ChatClient& client,
    const AnnotatedPromptOptions& options = {}, DiskCache* cache = nullptr,
    const TemplateSet& templates = TemplateSet::builtin());

/// Same prompt fanned out to several judges (ensemble members see identical
/// prompt content, only the backend differs), aggregated by majority_vote.
JudgeOutcome judge_response_ensemble(
    const AnnotatedResponse& target,
    const std::vector<const AnnotatedResponse*>& peers,
    const SourceDocument& source,
    const std::vector<ChatClient*>& clients,
    const AnnotatedPromptOptions& options = {}, DiskCache* cache = nullptr,
    const TemplateSet& templates = TemplateSet::builtin(),
    std::vector<JudgeVerdict>* votes = nullptr);

/// Claim-wise judgment: decompose the response into claims, verify the
/// claim list, classify Inconsistent iff at least one claim is judged
/// unsupported. An empty decomposition yields a flagged fallback verdict.
JudgeOutcome judge_claimwise(
    const SourceDocument& source, const AnnotatedResponse& response,
    ChatClient& decompose_client, ChatClient& verify_client,
    DiskCache* cache = nullptr,
    const TemplateSet& templates = TemplateSet::builtin());

/// Majority vote over same-mode verdicts. The modal class wins; any tie
/// falls back to the mode's inconsistent class. The invalid flag is set
/// when at least half of the votes flag invalid.
JudgeVerdict majority_vote(std::span<const JudgeVerdict> verdicts);

}  // namespace faitheval
