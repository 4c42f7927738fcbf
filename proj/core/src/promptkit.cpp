#include "faitheval/promptkit.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "faitheval/hash.hpp"
#include "faitheval/text.hpp"
#include "template_data.hpp"

namespace faitheval {

namespace {

constexpr std::string_view kVerifyClaimUserError =
    "claim verification needs at least one claim";

std::string canonical_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string quote(std::string_view text) {
    std::string out = "\"";
    out += text;
    out += "\"";
    return out;
}

std::string_view task_noun(TaskKind task) {
    switch (task) {
        case TaskKind::Summarization: return "article";
        case TaskKind::QuestionAnswering: return "question and passages";
        case TaskKind::DataToText: return "structured record";
    }
    return "article";
}

std::string_view generation_instruction(TaskKind task) {
    switch (task) {
        case TaskKind::Summarization:
            return "Provide a concise summary of the passage below. The "
                   "summary must be strictly grounded in the passage: "
                   "include only information the passage states.";
        case TaskKind::QuestionAnswering:
            return "Answer the question below using only the provided "
                   "passages. If the passages do not contain the answer, "
                   "say that they do not.";
        case TaskKind::DataToText:
            return "Write a short overview of the business described by the "
                   "structured record below, using only information present "
                   "in the record.";
    }
    return "";
}

// Unbiased uniform draw in [0, m) from a fully specified generator, so
// sampling is identical across platforms.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t m) {
    const std::uint64_t threshold = (0 - m) % m;  // 2^64 mod m
    for (;;) {
        std::uint64_t r = rng();
        if (r >= threshold) return r % m;
    }
}

void seeded_shuffle(std::vector<const AnnotatedResponse*>& pool,
                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = pool.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(pool[i - 1], pool[j]);
    }
}

void sort_by_generator_then_id(std::vector<const AnnotatedResponse*>& peers) {
    std::sort(peers.begin(), peers.end(),
              [](const AnnotatedResponse* a, const AnnotatedResponse* b) {
                  return std::tie(a->generator, a->id) <
                         std::tie(b->generator, b->id);
              });
}

std::string render_example(const AnnotatedResponse& peer, std::size_t index) {
    std::ostringstream os;
    os << "--- Example " << index << " (response by " << peer.generator
       << "; overall label: "
       << label_name(peer.gold.value_or(HallucinationLabel::Consistent))
       << ") ---\n";
    os << peer.text << "\n";
    if (peer.spans.empty()) {
        os << "Annotators found no hallucinations in this response.\n";
        return os.str();
    }
    os << "Annotated hallucination spans:\n";
    for (const auto& span : peer.spans) {
        if (span.end > peer.text.size() || span.start >= span.end) {
            throw PromptError("span [" + std::to_string(span.start) + ", " +
                              std::to_string(span.end) +
                              ") out of bounds while rendering response '" +
                              peer.id + "'");
        }
        os << "  * " << quote(peer.text.substr(span.start,
                                               span.end - span.start))
           << " [" << label_name(span.label) << "]";
        if (span.source_excerpt)
            os << " source: " << quote(*span.source_excerpt);
        if (span.note) os << " note: " << quote(*span.note);
        os << "\n";
    }
    return os.str();
}

std::string join(const std::vector<std::string>& parts,
                 std::string_view sep) {
    std::string out;
    for (const auto& part : parts) {
        if (!out.empty()) out += sep;
        out += part;
    }
    return out;
}

PromptBundle finalize(PromptFlavor flavor, const PromptTemplate& tmpl,
                      std::string user_text, const Decoding& decoding,
                      std::size_t example_count) {
    PromptBundle bundle;
    bundle.flavor = flavor;
    bundle.template_version = tmpl.version;
    bundle.messages = {{Role::System, tmpl.system_text},
                       {Role::User, std::move(user_text)}};
    bundle.decoding = decoding;
    bundle.example_count = example_count;
    bundle.content_hash = prompt_content_hash(flavor, tmpl.version,
                                              bundle.messages, decoding);
    return bundle;
}

}  // namespace

std::string_view flavor_name(PromptFlavor flavor) {
    switch (flavor) {
        case PromptFlavor::AnnotatedBinary: return "annotated_binary";
        case PromptFlavor::AnnotatedTernary: return "annotated_ternary";
        case PromptFlavor::FactsJson: return "facts_json";
        case PromptFlavor::ChainOfThought: return "chain_of_thought";
        case PromptFlavor::ClaimsVerify: return "claims_verify";
        case PromptFlavor::ClaimDecompose: return "claim_decompose";
        case PromptFlavor::Generation: return "generation";
    }
    return "annotated_binary";
}

PromptFlavor flavor_from_name(std::string_view name) {
    std::string lower = to_lower(name);
    for (auto flavor :
         {PromptFlavor::AnnotatedBinary, PromptFlavor::AnnotatedTernary,
          PromptFlavor::FactsJson, PromptFlavor::ChainOfThought,
          PromptFlavor::ClaimsVerify, PromptFlavor::ClaimDecompose,
          PromptFlavor::Generation}) {
        if (lower == flavor_name(flavor)) return flavor;
    }
    throw UsageError("unknown prompt flavor: " + std::string(name));
}

std::string_view mode_name(JudgeMode mode) {
    return mode == JudgeMode::Binary ? "binary" : "ternary";
}

JudgeMode mode_from_name(std::string_view name) {
    std::string lower = to_lower(name);
    if (lower == "binary") return JudgeMode::Binary;
    if (lower == "ternary") return JudgeMode::Ternary;
    throw UsageError("unknown judge mode: " + std::string(name));
}

std::string prompt_content_hash(PromptFlavor flavor,
                                std::string_view template_version,
                                std::span<const Message> messages,
                                const Decoding& decoding) {
    std::ostringstream os;
    os << "fe-prompt-v1\n";
    os << "flavor:" << flavor_name(flavor) << "\n";
    os << "template:" << template_version << "\n";
    os << "temperature:" << canonical_double(decoding.temperature) << "\n";
    os << "max_output_tokens:" << decoding.max_output_tokens << "\n";
    for (const auto& message : messages) {
        os << "message:" << (message.role == Role::System ? "system" : "user")
           << ":" << message.text.size() << "\n"
           << message.text << "\n";
    }
    return sha256_hex(os.str());
}

PromptTemplate TemplateSet::parse(std::string_view text,
                                  std::string_view origin) {
    PromptTemplate tmpl;
    enum class Section { Header, System, User } section = Section::Header;
    std::string system_text;
    std::string user_text;
    for (const auto& line : split_lines(text)) {
        if (line == "---SYSTEM---") {
            section = Section::System;
            continue;
        }
        if (line == "---USER---") {
            section = Section::User;
            continue;
        }
        switch (section) {
            case Section::Header: {
                auto trimmed = trim(line);
                if (trimmed.empty() || trimmed.front() == '#') break;
                if (trimmed.rfind("version:", 0) == 0) {
                    tmpl.version =
                        std::string(trim(trimmed.substr(8)));
                } else {
                    throw ConfigError("template " + std::string(origin) +
                                      ": unexpected header line '" +
                                      std::string(trimmed) + "'");
                }
                break;
            }
            case Section::System:
                system_text += line;
                system_text += "\n";
                break;
            case Section::User:
                user_text += line;
                user_text += "\n";
                break;
        }
    }
    if (tmpl.version.empty())
        throw ConfigError("template " + std::string(origin) +
                          ": missing 'version:' header");
    if (user_text.empty())
        throw ConfigError("template " + std::string(origin) +
                          ": missing ---USER--- section");
    tmpl.system_text = std::string(trim(system_text));
    tmpl.user_text = std::string(trim(user_text));
    return tmpl;
}

void TemplateSet::rehash() {
    std::ostringstream os;
    for (const auto& [flavor, tmpl] : templates_) {
        os << flavor_name(flavor) << '\0' << tmpl.version << '\0'
           << tmpl.system_text << '\0' << tmpl.user_text << '\0';
    }
    set_hash_ = sha256_hex(os.str());
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet instance = [] {
        TemplateSet set;
        for (std::size_t i = 0; i < detail::kEmbeddedTemplateCount; ++i) {
            const auto& entry = detail::kEmbeddedTemplates[i];
            std::string_view text(
                reinterpret_cast<const char*>(entry.data), entry.size);
            set.templates_[flavor_from_name(entry.name)] =
                parse(text, entry.name);
        }
        set.rehash();
        return set;
    }();
    return instance;
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    TemplateSet set = builtin();
    for (auto& [flavor, tmpl] : set.templates_) {
        auto path = dir / (std::string(flavor_name(flavor)) + ".txt");
        if (!std::filesystem::exists(path)) continue;
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        tmpl = parse(buf.str(), path.string());
    }
    set.rehash();
    return set;
}

const PromptTemplate& TemplateSet::get(PromptFlavor flavor) const {
    auto it = templates_.find(flavor);
    if (it == templates_.end())
        throw ConfigError("no template for flavor '" +
                          std::string(flavor_name(flavor)) + "'");
    return it->second;
}

PromptBundle build_annotated_judge_prompt(
    const AnnotatedResponse& target,
    std::vector<const AnnotatedResponse*> peers, const SourceDocument& source,
    const AnnotatedPromptOptions& options, const TemplateSet& templates) {
    // leave-one-out and same-source preconditions
    std::vector<std::string> seen;
    for (const auto* peer : peers) {
        if (peer->source_id != source.id)
            throw PromptError("peer '" + peer->id +
                              "' references source '" + peer->source_id +
                              "', not '" + source.id + "'");
        if (!peer->gold)
            throw PromptError("peer '" + peer->id + "' is unannotated");
        if (peer->id == target.id && !options.allow_self_inclusion)
            throw PromptError("target '" + target.id +
                              "' appears among its own example responses");
        seen.push_back(peer->id);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw PromptError("duplicate peer ids in example pool");

    sort_by_generator_then_id(peers);

    bool self_included = false;
    if (options.max_examples > peers.size() && options.allow_self_inclusion &&
        std::find_if(peers.begin(), peers.end(),
                     [&](const AnnotatedResponse* p) {
                         return p->id == target.id;
                     }) == peers.end()) {
        if (!target.gold)
            throw PromptError("self-inclusion requires an annotated target");
        peers.push_back(&target);
        sort_by_generator_then_id(peers);
        self_included = true;
    }

    if (options.max_examples < peers.size()) {
        seeded_shuffle(peers, options.sample_seed);
        peers.resize(options.max_examples);
        sort_by_generator_then_id(peers);
    }

    if (peers.empty())
        spdlog::warn(
            "no annotated examples available for response '{}'; building a "
            "zero-example prompt",
            target.id);

    std::string examples_text;
    std::vector<std::string> example_ids;
    std::vector<std::string> example_labels;
    for (std::size_t i = 0; i < peers.size(); ++i) {
        examples_text += render_example(*peers[i], i + 1);
        if (i + 1 < peers.size()) examples_text += "\n";
        example_ids.push_back(peers[i]->id);
        example_labels.emplace_back(label_name(
            peers[i]->gold.value_or(HallucinationLabel::Consistent)));
    }
    if (peers.empty())
        examples_text = "(no annotated examples available)";

    const auto flavor = options.mode == JudgeMode::Binary
                            ? PromptFlavor::AnnotatedBinary
                            : PromptFlavor::AnnotatedTernary;
    const auto& tmpl = templates.get(flavor);
    std::string user_text = tmpl.user_text;
    user_text = replace_placeholder(std::move(user_text), "task_noun",
                                    task_noun(source.task));
    user_text =
        replace_placeholder(std::move(user_text), "context", source.context);
    user_text =
        replace_placeholder(std::move(user_text), "examples", examples_text);
    user_text =
        replace_placeholder(std::move(user_text), "response", target.text);
    user_text = replace_placeholder(
        std::move(user_text), "invalid_clause",
        options.leaderboard_mode
            ? " If the response fails to perform the task at all (for "
              "example, it is empty, refuses, or answers a different "
              "question), also output the line \"Invalid response: yes\" on "
              "its own line before the final classification."
            : "");

    PromptBundle bundle =
        finalize(flavor, tmpl, std::move(user_text), Decoding{}, peers.size());
    bundle.meta["target_id"] = target.id;
    bundle.meta["source_id"] = source.id;
    bundle.meta["example_ids"] = join(example_ids, ",");
    bundle.meta["example_labels"] = join(example_labels, ",");
    bundle.meta["self_included"] = self_included ? "true" : "false";
    bundle.meta["mode"] = std::string(mode_name(options.mode));
    return bundle;
}

PromptBundle build_zero_shot_prompt(PromptFlavor flavor,
                                    const SourceDocument& source,
                                    std::string_view response_text,
                                    const TemplateSet& templates) {
    if (flavor != PromptFlavor::FactsJson &&
        flavor != PromptFlavor::ChainOfThought)
        throw UsageError("zero-shot flavor must be facts_json or "
                         "chain_of_thought");
    if (response_text.empty())
        throw PromptError("cannot judge an empty response");
    const auto& tmpl = templates.get(flavor);
    std::string user_text = tmpl.user_text;
    user_text = replace_placeholder(std::move(user_text), "task_noun",
                                    task_noun(source.task));
    user_text =
        replace_placeholder(std::move(user_text), "context", source.context);
    user_text =
        replace_placeholder(std::move(user_text), "response", response_text);
    PromptBundle bundle =
        finalize(flavor, tmpl, std::move(user_text), Decoding{}, 0);
    bundle.meta["source_id"] = source.id;
    return bundle;
}

PromptBundle build_claim_decompose_prompt(const SourceDocument& source,
                                          std::string_view response_text,
                                          const TemplateSet& templates) {
    if (response_text.empty())
        throw PromptError("cannot decompose an empty response");
    auto sentences = split_sentences(response_text);
    std::ostringstream sentences_text;
    for (std::size_t i = 0; i < sentences.size(); ++i)
        sentences_text << (i + 1) << ". " << sentences[i] << "\n";
    const auto& tmpl = templates.get(PromptFlavor::ClaimDecompose);
    std::string user_text = replace_placeholder(
        tmpl.user_text, "sentences", trim(sentences_text.str()));
    PromptBundle bundle = finalize(PromptFlavor::ClaimDecompose, tmpl,
                                   std::move(user_text), Decoding{}, 0);
    bundle.meta["source_id"] = source.id;
    bundle.meta["sentence_count"] = std::to_string(sentences.size());
    return bundle;
}

PromptBundle build_claim_verify_prompt(const SourceDocument& source,
                                       std::span<const std::string> claims,
                                       const TemplateSet& templates) {
    if (claims.empty()) throw UsageError(std::string(kVerifyClaimUserError));
    std::ostringstream claims_text;
    for (std::size_t i = 0; i < claims.size(); ++i)
        claims_text << (i + 1) << ". " << claims[i] << "\n";
    const auto& tmpl = templates.get(PromptFlavor::ClaimsVerify);
    std::string user_text = tmpl.user_text;
    user_text = replace_placeholder(std::move(user_text), "task_noun",
                                    task_noun(source.task));
    user_text =
        replace_placeholder(std::move(user_text), "context", source.context);
    user_text = replace_placeholder(std::move(user_text), "claims",
                                    trim(claims_text.str()));
    PromptBundle bundle = finalize(PromptFlavor::ClaimsVerify, tmpl,
                                   std::move(user_text), Decoding{}, 0);
    bundle.meta["source_id"] = source.id;
    bundle.meta["claim_count"] = std::to_string(claims.size());
    return bundle;
}

PromptBundle build_generation_prompt(const SourceDocument& source,
                                     const TemplateSet& templates) {
    const auto& tmpl = templates.get(PromptFlavor::Generation);
    std::string user_text = tmpl.user_text;
    user_text = replace_placeholder(std::move(user_text), "task_instruction",
                                    generation_instruction(source.task));
    user_text =
        replace_placeholder(std::move(user_text), "context", source.context);
    PromptBundle bundle = finalize(PromptFlavor::Generation, tmpl,
                                   std::move(user_text), Decoding{}, 0);
    bundle.meta["source_id"] = source.id;
    bundle.meta["task"] = std::string(task_name(source.task));
    return bundle;
}

}  // namespace faitheval
