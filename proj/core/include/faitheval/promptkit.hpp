#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faitheval/corpus.hpp"

namespace faitheval {

enum class PromptFlavor {
    AnnotatedBinary,   // annotated few-shot judge, binary classes
    AnnotatedTernary,  // annotated few-shot judge, ternary classes
    FactsJson,         // zero-shot structured-JSON judgment
    ChainOfThought,    // zero-shot reasoning-then-verdict
    ClaimsVerify,      // claims-list verification
    ClaimDecompose,    // response-to-atomic-claims decomposition
    Generation,        // candidate-response generation
};

std::string_view flavor_name(PromptFlavor flavor);
PromptFlavor flavor_from_name(std::string_view name);  // throws UsageError

enum class Role { System, User };

struct Message {
    Role role = Role::User;
    std::string text;
};

struct Decoding {
    double temperature = 0.0;  // verdict reproducibility
    int max_output_tokens = 2048;
};

/// A fully rendered, hashable request. `content_hash` is a pure function of
/// (flavor, template version, messages, decoding); `meta` carries run
/// metadata and is deliberately excluded from the hash.
struct PromptBundle {
    PromptFlavor flavor = PromptFlavor::AnnotatedBinary;
    std::vector<Message> messages;
    Decoding decoding;
    std::string content_hash;
    std::size_t example_count = 0;
    std::string template_version;
    std::map<std::string, std::string> meta;
};

/// Computes the canonical content hash; builders call this, and tests use it
/// to check hash purity.
std::string prompt_content_hash(PromptFlavor flavor,
                                std::string_view template_version,
                                std::span<const Message> messages,
                                const Decoding& decoding);

struct PromptTemplate {
    std::string version;
    std::string system_text;
    std::string user_text;  // contains {{placeholders}}
};

/// The template resources, one per flavor. Defaults are embedded into the
/// library from the files shipped under core/templates/; a directory of
/// files with the same names overrides them.
class TemplateSet {
public:
    static const TemplateSet& builtin();

    /// Overrides templates from `<dir>/<flavor>.txt` files. Missing files
    /// keep the built-in template; malformed files throw ConfigError.
    static TemplateSet load_dir(const std::filesystem::path& dir);

    static PromptTemplate parse(std::string_view text,
                                std::string_view origin);

    const PromptTemplate& get(PromptFlavor flavor) const;

    /// Digest over every template, recorded in run metadata.
    const std::string& set_hash() const { return set_hash_; }

private:
    TemplateSet() = default;
    std::map<PromptFlavor, PromptTemplate> templates_;
    std::string set_hash_;

    void rehash();
};

enum class JudgeMode { Binary, Ternary };

std::string_view mode_name(JudgeMode mode);
JudgeMode mode_from_name(std::string_view name);  // throws UsageError

constexpr std::size_t kAllExamples = std::numeric_limits<std::size_t>::max();

struct AnnotatedPromptOptions {
    JudgeMode mode = JudgeMode::Binary;
    std::size_t max_examples = kAllExamples;
    /// When max_examples exceeds the peer pool, allows embedding the target
    /// itself as an additional example (the k = all case in the example
    /// count sweep). Off by default: normal mode is strictly leave-one-out.
    bool allow_self_inclusion = false;
    /// Adds the invalid-response flag instruction used in leaderboard runs.
    bool leaderboard_mode = false;
    /// Seed for sampling when max_examples < available peers. Sampling
    /// takes the first max_examples entries of a seeded permutation of the
    /// canonically ordered pool, so subsets are nested as k grows.
    std::uint64_t sample_seed = 0;
};

/// Renders the annotated few-shot judge prompt: source context, up to
/// max_examples peer responses with their spans/labels/excerpts in a fixed
/// order (generator, then id), then the target response and the
/// output-format instruction.
PromptBundle build_annotated_judge_prompt(
    const AnnotatedResponse& target,
    std::vector<const AnnotatedResponse*> peers, const SourceDocument& source,
    const AnnotatedPromptOptions& options = {},
    const TemplateSet& templates = TemplateSet::builtin());

/// Zero-shot judgment over the whole response; flavor must be FactsJson or
/// ChainOfThought.
PromptBundle build_zero_shot_prompt(
    PromptFlavor flavor, const SourceDocument& source,
    std::string_view response_text,
    const TemplateSet& templates = TemplateSet::builtin());

/// Decomposition prompt enumerating the response's sentences, one atomic
/// claim per output line.
PromptBundle build_claim_decompose_prompt(
    const SourceDocument& source, std::string_view response_text,
    const TemplateSet& templates = TemplateSet::builtin());

/// Claims-list verification prompt; throws UsageError on an empty list.
PromptBundle build_claim_verify_prompt(
    const SourceDocument& source, std::span<const std::string> claims,
    const TemplateSet& templates = TemplateSet::builtin());

/// Task-appropriate grounded-generation prompt (summarize / answer from
/// passages / write an overview of the structured record).
PromptBundle build_generation_prompt(
    const SourceDocument& source,
    const TemplateSet& templates = TemplateSet::builtin());

}  // namespace faitheval
