#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faitheval/errors.hpp"

namespace faitheval {

/// Severity taxonomy for annotated responses. The underlying value is the
/// severity rank, so the built-in comparison operators give the total order
/// Consistent < Benign < Questionable < Unwanted.
enum class HallucinationLabel {
    Consistent = 0,
    Benign = 1,
    Questionable = 2,
    Unwanted = 3,
};

std::string_view label_name(HallucinationLabel label);
HallucinationLabel label_from_name(std::string_view name);  // throws UsageError

enum class TaskKind {
    Summarization,
    QuestionAnswering,
    DataToText,
};

std::string_view task_name(TaskKind task);
TaskKind task_from_name(std::string_view name);  // throws UsageError

struct SourceDocument {
    std::string id;
    TaskKind task = TaskKind::Summarization;
    std::string context;  // article / question+passages / structured record
    std::string dataset_tag;
    std::size_t word_count = 0;  // whitespace tokens in context, set at load
};

/// A human-marked hallucination span inside a response. `end` is exclusive.
struct AnnotationSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    HallucinationLabel label = HallucinationLabel::Unwanted;  // never Consistent
    std::optional<std::string> source_excerpt;
    std::optional<std::string> note;
};

struct AnnotatedResponse {
    std::string id;
    std::string source_id;
    std::string generator;  // model name
    std::string text;
    std::vector<HallucinationLabel> annotator_labels;  // one per annotator
    std::vector<AnnotationSpan> spans;
    // Pooled gold label; absent for unannotated candidates, which are
    // eligible for judging but excluded from metric computation.
    std::optional<HallucinationLabel> gold;
};

struct DatasetBundle {
    std::map<std::string, SourceDocument> sources;
    std::map<std::string, AnnotatedResponse> responses;
    std::map<std::string, std::string> provenance;  // load path, counts, ...

    const SourceDocument& source_of(const AnnotatedResponse& response) const;
    /// Responses referencing `source_id`, ordered by response id.
    std::vector<const AnnotatedResponse*> responses_for(
        const std::string& source_id) const;
};

enum class DatasetFormat {
    FaithbenchJson,
    RagtruthJsonl,
    NativeJsonl,
};

std::string_view format_name(DatasetFormat format);
DatasetFormat format_from_name(std::string_view name);  // throws UsageError

/// Loads and validates a dataset. External layouts (FaithBench, RAGTruth)
/// are converted to the native schema at load time. Throws CorpusError
/// listing every offending record on any validation failure.
DatasetBundle load_dataset(const std::filesystem::path& path,
                           DatasetFormat format);

/// Writes the bundle in the native line-delimited format, records ordered
/// by id so that identical bundles serialize byte-identically.
void save_dataset(const DatasetBundle& bundle,
                  const std::filesystem::path& path);

/// Runs every bundle invariant (span bounds, reference integrity, gold
/// pooling consistency) and throws CorpusError listing all violations.
void validate_bundle(const DatasetBundle& bundle);

/// Pools per-annotator labels into a gold label: the most severe label L
/// such that a strict majority of annotators gave a label at severity >= L.
/// Throws UsageError on an empty list.
HallucinationLabel pool_gold_label(std::span<const HallucinationLabel> labels);

enum class BinaryClass {
    Consistent,
    Inconsistent,
};

std::string_view binary_class_name(BinaryClass klass);

/// Strict binary gold mapping: keeps only gold in {Unwanted, Consistent};
/// Unwanted maps to Inconsistent.
struct BinaryExample {
    const AnnotatedResponse* response = nullptr;
    BinaryClass gold = BinaryClass::Consistent;
};

std::vector<BinaryExample> binary_eval_subset(const DatasetBundle& bundle);

/// Leaderboard-mode gold mapping: everything except Consistent counts as
/// Inconsistent.
BinaryClass leaderboard_gold(HallucinationLabel label);

/// One evaluation source with its annotated responses (ordered by
/// generator, then response id).
struct SubsetSource {
    const SourceDocument* source = nullptr;
    std::vector<const AnnotatedResponse*> responses;
};

/// Builds the leaderboard evaluation subset for one task: drops sources
/// where no response carries a hallucination annotation, orders sources by
/// id, and truncates to `cap`.
std::vector<SubsetSource> leaderboard_eval_subset(const DatasetBundle& bundle,
                                                  TaskKind task,
                                                  std::size_t cap = 150);

}  // namespace faitheval
