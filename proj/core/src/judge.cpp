#include "faitheval/judge.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "faitheval/text.hpp"

namespace faitheval {

std::string_view verdict_class_name(VerdictClass klass) {
    switch (klass) {
        case VerdictClass::Consistent: return "Consistent";
        case VerdictClass::Benign: return "Benign";
        case VerdictClass::Unwanted: return "Unwanted";
        case VerdictClass::Inconsistent: return "Inconsistent";
    }
    return "Inconsistent";
}

VerdictClass verdict_class_from_name(std::string_view name) {
    std::string lower = to_lower(name);
    if (lower == "consistent") return VerdictClass::Consistent;
    if (lower == "benign") return VerdictClass::Benign;
    if (lower == "unwanted") return VerdictClass::Unwanted;
    if (lower == "inconsistent") return VerdictClass::Inconsistent;
    throw UsageError("unknown verdict class: " + std::string(name));
}

bool class_in_mode(VerdictClass klass, JudgeMode mode) {
    if (mode == JudgeMode::Binary)
        return klass == VerdictClass::Consistent ||
               klass == VerdictClass::Inconsistent;
    return klass == VerdictClass::Consistent ||
           klass == VerdictClass::Benign || klass == VerdictClass::Unwanted;
}

VerdictClass fallback_class(JudgeMode mode) {
    return mode == JudgeMode::Binary ? VerdictClass::Inconsistent
                                     : VerdictClass::Unwanted;
}

JudgeVerdict parse_verdict(std::string_view raw, JudgeMode mode) {
    static const std::regex verdict_re(
        R"(final\s+classification\s*\**\s*[:\-]?\s*\**\s*"?\s*([a-z]+))",
        std::regex::icase);
    static const std::regex invalid_re(
        R"(invalid\s+response\s*\**\s*[:\-]?\s*\**\s*"?\s*(yes|no))",
        std::regex::icase);

    JudgeVerdict verdict;
    verdict.mode = mode;
    verdict.raw = std::string(raw);

    auto lines = split_lines(raw);
    long verdict_line = -1;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::smatch match;
        if (std::regex_search(lines[i], match, verdict_re)) {
            std::string token = to_lower(match[1].str());
            VerdictClass klass;
            if (token == "consistent") {
                klass = VerdictClass::Consistent;
            } else if (token == "inconsistent") {
                klass = VerdictClass::Inconsistent;
            } else if (token == "benign") {
                klass = VerdictClass::Benign;
            } else if (token == "unwanted") {
                klass = VerdictClass::Unwanted;
            } else {
                continue;
            }
            if (!class_in_mode(klass, mode)) continue;
            verdict.klass = klass;
            verdict_line = static_cast<long>(i);
        }
        std::smatch invalid_match;
        if (std::regex_search(lines[i], invalid_match, invalid_re)) {
            verdict.invalid_response =
                to_lower(invalid_match[1].str()) == "yes";
        }
    }

    if (verdict_line < 0) {
        verdict.parse_ok = false;
        verdict.klass = fallback_class(mode);
        return verdict;
    }

    std::string rationale;
    for (long i = 0; i < verdict_line; ++i) {
        rationale += lines[static_cast<std::size_t>(i)];
        rationale += "\n";
    }
    verdict.rationale = std::string(trim(rationale));
    return verdict;
}

ClaimSet parse_claim_set(std::string_view raw, std::string response_id,
                         std::size_t sentence_count) {
    static const std::regex claim_re(R"(^\s*S(\d+)\.C(\d+)\s*[:.]\s*(.+)$)",
                                     std::regex::icase);
    ClaimSet set;
    set.response_id = std::move(response_id);
    for (const auto& line : split_lines(raw)) {
        std::smatch match;
        if (!std::regex_match(line, match, claim_re)) continue;
        std::size_t sentence = std::stoul(match[1].str());
        if (sentence == 0 || sentence > sentence_count) continue;
        Claim claim;
        claim.sentence_index = sentence - 1;
        claim.text = std::string(trim(match[3].str()));
        if (!claim.text.empty()) set.claims.push_back(std::move(claim));
    }
    return set;
}

JudgeOutcome judge_response(const AnnotatedResponse& target,
                            const std::vector<const AnnotatedResponse*>& peers,
                            const SourceDocument& source, ChatClient& client,
                            const AnnotatedPromptOptions& options,
                            DiskCache* cache, const TemplateSet& templates) {
    auto bundle =
        build_annotated_judge_prompt(target, peers, source, options, templates);
    bool cache_hit = false;
    std::string raw = complete(client, bundle, cache, &cache_hit);
    JudgeOutcome outcome;
    outcome.verdict = parse_verdict(raw, options.mode);
    outcome.example_count = bundle.example_count;
    outcome.cache_hit = cache_hit;
    outcome.self_included = bundle.meta["self_included"] == "true";
    outcome.prompt_hash = bundle.content_hash;
    outcome.template_version = bundle.template_version;
    return outcome;
}

JudgeOutcome judge_response_ensemble(
    const AnnotatedResponse& target,
    const std::vector<const AnnotatedResponse*>& peers,
    const SourceDocument& source, const std::vector<ChatClient*>& clients,
    const AnnotatedPromptOptions& options, DiskCache* cache,
    const TemplateSet& templates, std::vector<JudgeVerdict>* votes) {
    if (clients.empty())
        throw UsageError("ensemble needs at least one judge backend");
    // every member receives identical prompt content; only the backend
    // (and hence the cache key) differs
    auto bundle =
        build_annotated_judge_prompt(target, peers, source, options, templates);
    std::vector<JudgeVerdict> member_verdicts;
    bool all_hits = true;
    for (auto* client : clients) {
        bool cache_hit = false;
        std::string raw = complete(*client, bundle, cache, &cache_hit);
        all_hits = all_hits && cache_hit;
        member_verdicts.push_back(parse_verdict(raw, options.mode));
    }
    JudgeOutcome outcome;
    outcome.verdict = clients.size() == 1 ? member_verdicts.front()
                                          : majority_vote(member_verdicts);
    outcome.example_count = bundle.example_count;
    outcome.cache_hit = all_hits;
    outcome.self_included = bundle.meta["self_included"] == "true";
    outcome.prompt_hash = bundle.content_hash;
    outcome.template_version = bundle.template_version;
    if (votes) *votes = std::move(member_verdicts);
    return outcome;
}

JudgeOutcome judge_claimwise(const SourceDocument& source,
                             const AnnotatedResponse& response,
                             ChatClient& decompose_client,
                             ChatClient& verify_client, DiskCache* cache,
                             const TemplateSet& templates) {
    auto decompose_bundle =
        build_claim_decompose_prompt(source, response.text, templates);
    decompose_bundle.meta["target_id"] = response.id;
    std::string decompose_raw =
        complete(decompose_client, decompose_bundle, cache);
    std::size_t sentence_count = static_cast<std::size_t>(
        std::stoul(decompose_bundle.meta.at("sentence_count")));
    ClaimSet claims =
        parse_claim_set(decompose_raw, response.id, sentence_count);

    JudgeOutcome outcome;
    outcome.template_version = decompose_bundle.template_version;
    outcome.prompt_hash = decompose_bundle.content_hash;
    outcome.verdict.mode = JudgeMode::Binary;

    if (claims.claims.empty()) {
        outcome.verdict.parse_ok = false;
        outcome.verdict.klass = fallback_class(JudgeMode::Binary);
        outcome.verdict.raw = decompose_raw;
        outcome.verdict.rationale = "decomposition produced no claims";
        return outcome;
    }

    std::vector<std::string> claim_texts;
    claim_texts.reserve(claims.claims.size());
    for (const auto& claim : claims.claims) claim_texts.push_back(claim.text);
    auto verify_bundle =
        build_claim_verify_prompt(source, claim_texts, templates);
    verify_bundle.meta["target_id"] = response.id;
    std::string verify_raw = complete(verify_client, verify_bundle, cache);
    outcome.prompt_hash = verify_bundle.content_hash;

    static const std::regex status_re(
        R"(^\s*(\d+)\s*[.):\-]\s*(supported|unsupported)\b)",
        std::regex::icase);
    std::map<std::size_t, bool> supported;  // claim number -> supported
    for (const auto& line : split_lines(verify_raw)) {
        std::smatch match;
        if (!std::regex_search(line, match, status_re)) continue;
        std::size_t number = std::stoul(match[1].str());
        if (number == 0 || number > claim_texts.size()) continue;
        supported[number] = to_lower(match[2].str()) == "supported";
    }

    outcome.verdict.raw = verify_raw;
    if (supported.empty()) {
        outcome.verdict.parse_ok = false;
        outcome.verdict.klass = fallback_class(JudgeMode::Binary);
        outcome.verdict.rationale =
            "verification output contained no claim statuses";
        return outcome;
    }

    // any unsupported claim makes the whole response Inconsistent; claims
    // the judge failed to address count as unsupported
    std::vector<std::string> failing;
    for (std::size_t number = 1; number <= claim_texts.size(); ++number) {
        auto it = supported.find(number);
        if (it == supported.end() || !it->second)
            failing.push_back(std::to_string(number) + ". " +
                              claim_texts[number - 1]);
    }
    if (failing.empty()) {
        outcome.verdict.klass = VerdictClass::Consistent;
        outcome.verdict.rationale = "all " +
                                    std::to_string(claim_texts.size()) +
                                    " claims supported";
    } else {
        outcome.verdict.klass = VerdictClass::Inconsistent;
        std::ostringstream os;
        os << failing.size() << " of " << claim_texts.size()
           << " claims unsupported:";
        for (const auto& claim : failing) os << "\n  " << claim;
        outcome.verdict.rationale = os.str();
    }
    return outcome;
}

JudgeVerdict majority_vote(std::span<const JudgeVerdict> verdicts) {
    if (verdicts.empty())
        throw UsageError("majority_vote requires at least one verdict");
    const JudgeMode mode = verdicts.front().mode;
    for (const auto& verdict : verdicts) {
        if (verdict.mode != mode)
            throw UsageError("majority_vote requires same-mode verdicts");
    }

    std::map<VerdictClass, std::size_t> counts;
    std::size_t invalid_count = 0;
    for (const auto& verdict : verdicts) {
        ++counts[verdict.klass];
        if (verdict.invalid_response) ++invalid_count;
    }
    std::size_t best = 0;
    for (const auto& [klass, count] : counts) best = std::max(best, count);
    std::vector<VerdictClass> winners;
    for (const auto& [klass, count] : counts)
        if (count == best) winners.push_back(klass);

    JudgeVerdict result;
    result.mode = mode;
    result.klass = winners.size() == 1 ? winners.front()
                                       : fallback_class(mode);
    result.invalid_response = 2 * invalid_count >= verdicts.size();
    std::ostringstream os;
    os << "majority vote over " << verdicts.size() << " verdicts:";
    for (const auto& [klass, count] : counts)
        os << " " << verdict_class_name(klass) << "=" << count;
    if (winners.size() > 1) os << " (tie -> "
                               << verdict_class_name(result.klass) << ")";
    result.rationale = os.str();
    return result;
}

}  // namespace faitheval
