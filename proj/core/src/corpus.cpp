#include "faitheval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faitheval/text.hpp"

namespace faitheval {

using nlohmann::json;

CorpusError::CorpusError(const std::string& summary,
                         std::vector<RecordIssue> issues)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << summary << " (" << issues.size() << " offending record"
             << (issues.size() == 1 ? "" : "s") << ")";
          for (const auto& issue : issues)
              os << "\n  " << issue.where << ": " << issue.what;
          return os.str();
      }()),
      issues_(std::move(issues)) {}

BackendError::BackendError(std::string backend_id, const std::string& what)
    : std::runtime_error("backend '" + backend_id + "': " + what),
      backend_id_(std::move(backend_id)) {}

std::string_view label_name(HallucinationLabel label) {
    switch (label) {
        case HallucinationLabel::Consistent: return "Consistent";
        case HallucinationLabel::Benign: return "Benign";
        case HallucinationLabel::Questionable: return "Questionable";
        case HallucinationLabel::Unwanted: return "Unwanted";
    }
    return "Unwanted";
}

HallucinationLabel label_from_name(std::string_view name) {
    // Hierarchical sub-labels like "Unwanted.Contradiction" collapse to the
    // base label.
    std::string base = to_lower(name.substr(0, name.find('.')));
    if (base == "consistent") return HallucinationLabel::Consistent;
    if (base == "benign") return HallucinationLabel::Benign;
    if (base == "questionable") return HallucinationLabel::Questionable;
    if (base == "unwanted") return HallucinationLabel::Unwanted;
    throw UsageError("unknown hallucination label: " + std::string(name));
}

std::string_view task_name(TaskKind task) {
    switch (task) {
        case TaskKind::Summarization: return "summarization";
        case TaskKind::QuestionAnswering: return "question_answering";
        case TaskKind::DataToText: return "data_to_text";
    }
    return "summarization";
}

TaskKind task_from_name(std::string_view name) {
    std::string lower = to_lower(name);
    if (lower == "summarization" || lower == "summary")
        return TaskKind::Summarization;
    if (lower == "question_answering" || lower == "qa")
        return TaskKind::QuestionAnswering;
    if (lower == "data_to_text" || lower == "data2txt")
        return TaskKind::DataToText;
    throw UsageError("unknown task kind: " + std::string(name));
}

std::string_view format_name(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::FaithbenchJson: return "faithbench_json";
        case DatasetFormat::RagtruthJsonl: return "ragtruth_jsonl";
        case DatasetFormat::NativeJsonl: return "native_jsonl";
    }
    return "native_jsonl";
}

DatasetFormat format_from_name(std::string_view name) {
    std::string lower = to_lower(name);
    if (lower == "faithbench_json") return DatasetFormat::FaithbenchJson;
    if (lower == "ragtruth_jsonl") return DatasetFormat::RagtruthJsonl;
    if (lower == "native_jsonl") return DatasetFormat::NativeJsonl;
    throw UsageError("unknown dataset format: " + std::string(name));
}

std::string_view binary_class_name(BinaryClass klass) {
    return klass == BinaryClass::Consistent ? "Consistent" : "Inconsistent";
}

const SourceDocument& DatasetBundle::source_of(
    const AnnotatedResponse& response) const {
    auto it = sources.find(response.source_id);
    if (it == sources.end())
        throw UsageError("response " + response.id +
                         " references unknown source " + response.source_id);
    return it->second;
}

std::vector<const AnnotatedResponse*> DatasetBundle::responses_for(
    const std::string& source_id) const {
    std::vector<const AnnotatedResponse*> out;
    for (const auto& [id, response] : responses) {
        if (response.source_id == source_id) out.push_back(&response);
    }
    return out;  // map iteration is already id-ordered
}

HallucinationLabel pool_gold_label(
    std::span<const HallucinationLabel> labels) {
    if (labels.empty())
        throw UsageError("pool_gold_label requires at least one label");
    const std::size_t n = labels.size();
    for (int sev = static_cast<int>(HallucinationLabel::Unwanted);
         sev > static_cast<int>(HallucinationLabel::Consistent); --sev) {
        std::size_t at_or_above = 0;
        for (auto label : labels) {
            if (static_cast<int>(label) >= sev) ++at_or_above;
        }
        if (2 * at_or_above > n) return static_cast<HallucinationLabel>(sev);
    }
    return HallucinationLabel::Consistent;
}

namespace {

struct IssueCollector {
    std::vector<RecordIssue> issues;

    void add(std::string where, std::string what) {
        issues.push_back({std::move(where), std::move(what)});
    }
    void raise_if_any(const std::string& summary) const {
        if (!issues.empty()) throw CorpusError(summary, issues);
    }
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open " + path.string(), {});
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string json_to_id(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

void insert_source(DatasetBundle& bundle, SourceDocument doc,
                   const std::string& where, IssueCollector& issues) {
    if (doc.context.empty()) {
        issues.add(where, "source '" + doc.id + "' has empty context");
        return;
    }
    doc.word_count = word_count(doc.context);
    auto [it, inserted] = bundle.sources.emplace(doc.id, std::move(doc));
    if (!inserted)
        issues.add(where, "duplicate source id '" + it->first + "'");
}

void insert_response(DatasetBundle& bundle, AnnotatedResponse response,
                     const std::string& where, IssueCollector& issues) {
    bool ok = true;
    for (const auto& span : response.spans) {
        if (span.label == HallucinationLabel::Consistent) {
            issues.add(where, "response '" + response.id +
                                  "' has a span labeled Consistent");
            ok = false;
        }
        if (span.start >= span.end || span.end > response.text.size()) {
            std::ostringstream os;
            os << "response '" << response.id << "' span [" << span.start
               << ", " << span.end << ") out of bounds for text of length "
               << response.text.size();
            issues.add(where, os.str());
            ok = false;
        }
    }
    if (!response.annotator_labels.empty()) {
        response.gold = pool_gold_label(response.annotator_labels);
        if (response.gold == HallucinationLabel::Consistent &&
            !response.spans.empty()) {
            issues.add(where, "response '" + response.id +
                                  "' pools to Consistent but carries " +
                                  std::to_string(response.spans.size()) +
                                  " hallucination span(s)");
            ok = false;
        }
    } else {
        response.gold.reset();
    }
    if (!ok) return;
    auto [it, inserted] =
        bundle.responses.emplace(response.id, std::move(response));
    if (!inserted)
        issues.add(where, "duplicate response id '" + it->first + "'");
}

void check_references(DatasetBundle& bundle, IssueCollector& issues) {
    for (const auto& [id, response] : bundle.responses) {
        if (!bundle.sources.count(response.source_id)) {
            issues.add(id, "dangling source reference '" +
                               response.source_id + "'");
        }
    }
}

AnnotationSpan span_from_json(const json& record, std::string_view start_key,
                              std::string_view end_key,
                              std::string_view label_key) {
    AnnotationSpan span;
    span.start = record.at(std::string(start_key)).get<std::size_t>();
    span.end = record.at(std::string(end_key)).get<std::size_t>();
    span.label =
        label_from_name(record.at(std::string(label_key)).get<std::string>());
    if (record.contains("source_excerpt") &&
        record["source_excerpt"].is_string())
        span.source_excerpt = record["source_excerpt"].get<std::string>();
    if (record.contains("note") && record["note"].is_string())
        span.note = record["note"].get<std::string>();
    return span;
}

DatasetBundle load_native_jsonl(const std::filesystem::path& path) {
    DatasetBundle bundle;
    IssueCollector issues;
    std::string content = read_file(path);
    auto lines = split_lines(content);
    std::size_t line_no = 0;
    for (const auto& line : lines) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::string where = path.filename().string() + ":" +
                            std::to_string(line_no);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            issues.add(where, std::string("invalid JSON: ") + e.what());
            continue;
        }
        try {
            std::string kind = record.at("kind").get<std::string>();
            if (kind == "source") {
                SourceDocument doc;
                doc.id = record.at("id").get<std::string>();
                doc.task =
                    task_from_name(record.at("task").get<std::string>());
                doc.context = record.at("context").get<std::string>();
                doc.dataset_tag =
                    record.value("dataset_tag", std::string("native"));
                insert_source(bundle, std::move(doc), where, issues);
            } else if (kind == "response") {
                AnnotatedResponse response;
                response.id = record.at("id").get<std::string>();
                response.source_id = record.at("source_id").get<std::string>();
                response.generator = record.at("generator").get<std::string>();
                response.text = record.at("text").get<std::string>();
                for (const auto& name :
                     record.value("annotator_labels", json::array())) {
                    response.annotator_labels.push_back(
                        label_from_name(name.get<std::string>()));
                }
                for (const auto& span_json :
                     record.value("spans", json::array())) {
                    response.spans.push_back(
                        span_from_json(span_json, "start", "end", "label"));
                }
                insert_response(bundle, std::move(response), where, issues);
            } else {
                issues.add(where, "unknown record kind '" + kind + "'");
            }
        } catch (const json::exception& e) {
            issues.add(where, std::string("malformed record: ") + e.what());
        } catch (const UsageError& e) {
            issues.add(where, e.what());
        }
    }
    check_references(bundle, issues);
    issues.raise_if_any("failed to load " + path.string());
    return bundle;
}

DatasetBundle load_faithbench_json(const std::filesystem::path& path) {
    DatasetBundle bundle;
    IssueCollector issues;
    json root;
    try {
        root = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw CorpusError("failed to parse " + path.string(),
                          {{path.string(), e.what()}});
    }
    const json& samples = root.contains("samples") ? root["samples"] : root;
    if (!samples.is_array())
        throw CorpusError("failed to load " + path.string(),
                          {{path.string(), "expected a 'samples' array"}});
    std::size_t index = 0;
    for (const auto& sample : samples) {
        std::string where =
            path.filename().string() + "#sample[" + std::to_string(index++) +
            "]";
        try {
            SourceDocument doc;
            doc.id = json_to_id(sample.at("sample_id"));
            doc.task = TaskKind::Summarization;
            doc.context = sample.at("source").get<std::string>();
            doc.dataset_tag = "faithbench";
            insert_source(bundle, doc, where, issues);
            for (const auto& summary : sample.at("summaries")) {
                AnnotatedResponse response;
                response.generator = summary.at("model").get<std::string>();
                response.id = doc.id + "::" + response.generator;
                response.source_id = doc.id;
                response.text = summary.at("summary").get<std::string>();
                for (const auto& annotation :
                     summary.value("annotations", json::array())) {
                    response.spans.push_back(span_from_json(
                        annotation, "summary_start", "summary_end", "label"));
                    if (annotation.contains("source_span") &&
                        annotation["source_span"].is_string()) {
                        response.spans.back().source_excerpt =
                            annotation["source_span"].get<std::string>();
                    }
                }
                if (summary.contains("annotator_labels")) {
                    for (const auto& name : summary["annotator_labels"]) {
                        response.annotator_labels.push_back(
                            label_from_name(name.get<std::string>()));
                    }
                } else {
                    // Single implicit annotator: the worst span label, or
                    // Consistent when nothing was marked.
                    HallucinationLabel worst = HallucinationLabel::Consistent;
                    for (const auto& span : response.spans)
                        worst = std::max(worst, span.label);
                    response.annotator_labels.push_back(worst);
                }
                // The majority can overrule individual span annotations;
                // a response pooled to Consistent keeps no spans.
                if (pool_gold_label(response.annotator_labels) ==
                    HallucinationLabel::Consistent) {
                    response.spans.clear();
                }
                insert_response(bundle, std::move(response), where, issues);
            }
        } catch (const json::exception& e) {
            issues.add(where, std::string("malformed sample: ") + e.what());
        } catch (const UsageError& e) {
            issues.add(where, e.what());
        }
    }
    check_references(bundle, issues);
    issues.raise_if_any("failed to load " + path.string());
    return bundle;
}

TaskKind ragtruth_task(std::string_view task_type) {
    std::string lower = to_lower(task_type);
    if (lower == "summary" || lower == "summarization")
        return TaskKind::Summarization;
    if (lower == "qa" || lower == "question answering")
        return TaskKind::QuestionAnswering;
    if (lower == "data2txt" || lower == "data2text" ||
        lower == "data_to_text")
        return TaskKind::DataToText;
    throw UsageError("unknown RAGTruth task_type: " + std::string(task_type));
}

std::string ragtruth_context(TaskKind task, const json& source_info) {
    if (source_info.is_string()) return source_info.get<std::string>();
    if (task == TaskKind::QuestionAnswering && source_info.is_object()) {
        std::string question = source_info.value("question", std::string());
        std::string passages;
        const auto& p = source_info.contains("passages")
                            ? source_info["passages"]
                            : json();
        if (p.is_string()) {
            passages = p.get<std::string>();
        } else if (p.is_array()) {
            for (const auto& passage : p) {
                if (!passages.empty()) passages += "\n\n";
                passages += passage.get<std::string>();
            }
        }
        return "Question: " + question + "\n\nPassages:\n" + passages;
    }
    return source_info.dump(2);
}

void ragtruth_source_record(DatasetBundle& bundle, const json& record,
                            const std::string& where,
                            IssueCollector& issues) {
    SourceDocument doc;
    doc.id = json_to_id(record.at("source_id"));
    doc.task = ragtruth_task(record.at("task_type").get<std::string>());
    doc.context = ragtruth_context(doc.task, record.at("source_info"));
    doc.dataset_tag = "ragtruth";
    insert_source(bundle, std::move(doc), where, issues);
}

void ragtruth_response_record(DatasetBundle& bundle, const json& record,
                              const std::string& where,
                              IssueCollector& issues) {
    AnnotatedResponse response;
    response.id = json_to_id(record.at("id"));
    response.source_id = json_to_id(record.at("source_id"));
    response.generator = record.at("model").get<std::string>();
    response.text = record.at("response").get<std::string>();
    const json labels = record.value("labels", json::array());
    for (const auto& label : labels) {
        AnnotationSpan span;
        span.start = label.at("start").get<std::size_t>();
        span.end = label.at("end").get<std::size_t>();
        // RAGTruth marks conflicts and baseless info without a severity
        // taxonomy; every annotated span counts as Unwanted here.
        span.label = HallucinationLabel::Unwanted;
        if (label.contains("meta") && label["meta"].is_string())
            span.note = label["meta"].get<std::string>();
        response.spans.push_back(std::move(span));
    }
    response.annotator_labels.push_back(labels.empty()
                                            ? HallucinationLabel::Consistent
                                            : HallucinationLabel::Unwanted);
    insert_response(bundle, std::move(response), where, issues);
}

DatasetBundle load_ragtruth_jsonl(const std::filesystem::path& path) {
    DatasetBundle bundle;
    IssueCollector issues;
    // Either a directory holding source_info.jsonl + response.jsonl, or a
    // single file with both record shapes mixed line by line.
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(path)) {
        files = {path / "source_info.jsonl", path / "response.jsonl"};
    } else {
        files = {path};
    }
    for (const auto& file : files) {
        std::string content = read_file(file);
        std::size_t line_no = 0;
        for (const auto& line : split_lines(content)) {
            ++line_no;
            if (trim(line).empty()) continue;
            std::string where =
                file.filename().string() + ":" + std::to_string(line_no);
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& e) {
                issues.add(where, std::string("invalid JSON: ") + e.what());
                continue;
            }
            try {
                if (record.contains("task_type")) {
                    ragtruth_source_record(bundle, record, where, issues);
                } else if (record.contains("response")) {
                    ragtruth_response_record(bundle, record, where, issues);
                } else {
                    issues.add(where,
                               "record is neither a source_info nor a "
                               "response record");
                }
            } catch (const json::exception& e) {
                issues.add(where,
                           std::string("malformed record: ") + e.what());
            } catch (const UsageError& e) {
                issues.add(where, e.what());
            }
        }
    }
    check_references(bundle, issues);
    issues.raise_if_any("failed to load " + path.string());
    return bundle;
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& path,
                           DatasetFormat format) {
    DatasetBundle bundle;
    switch (format) {
        case DatasetFormat::NativeJsonl:
            bundle = load_native_jsonl(path);
            break;
        case DatasetFormat::FaithbenchJson:
            bundle = load_faithbench_json(path);
            break;
        case DatasetFormat::RagtruthJsonl:
            bundle = load_ragtruth_jsonl(path);
            break;
    }
    bundle.provenance["path"] = path.string();
    bundle.provenance["format"] = std::string(format_name(format));
    bundle.provenance["source_count"] =
        std::to_string(bundle.sources.size());
    bundle.provenance["response_count"] =
        std::to_string(bundle.responses.size());
    spdlog::info("loaded {}: {} sources, {} responses", path.string(),
                 bundle.sources.size(), bundle.responses.size());
    return bundle;
}

void save_dataset(const DatasetBundle& bundle,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    for (const auto& [id, doc] : bundle.sources) {
        json record = {
            {"kind", "source"},
            {"id", doc.id},
            {"task", std::string(task_name(doc.task))},
            {"context", doc.context},
            {"dataset_tag", doc.dataset_tag},
        };
        out << record.dump() << "\n";
    }
    for (const auto& [id, response] : bundle.responses) {
        json labels = json::array();
        for (auto label : response.annotator_labels)
            labels.push_back(std::string(label_name(label)));
        json spans = json::array();
        for (const auto& span : response.spans) {
            json span_json = {
                {"start", span.start},
                {"end", span.end},
                {"label", std::string(label_name(span.label))},
            };
            if (span.source_excerpt)
                span_json["source_excerpt"] = *span.source_excerpt;
            if (span.note) span_json["note"] = *span.note;
            spans.push_back(std::move(span_json));
        }
        json record = {
            {"kind", "response"},
            {"id", response.id},
            {"source_id", response.source_id},
            {"generator", response.generator},
            {"text", response.text},
            {"annotator_labels", std::move(labels)},
            {"spans", std::move(spans)},
        };
        out << record.dump() << "\n";
    }
}

void validate_bundle(const DatasetBundle& bundle) {
    IssueCollector issues;
    for (const auto& [id, doc] : bundle.sources) {
        if (doc.context.empty())
            issues.add(id, "source has empty context");
        if (id != doc.id) issues.add(id, "source keyed under a foreign id");
    }
    for (const auto& [id, response] : bundle.responses) {
        if (id != response.id)
            issues.add(id, "response keyed under a foreign id");
        if (!bundle.sources.count(response.source_id))
            issues.add(id, "dangling source reference '" +
                               response.source_id + "'");
        for (const auto& span : response.spans) {
            if (span.start >= span.end || span.end > response.text.size()) {
                std::ostringstream os;
                os << "span [" << span.start << ", " << span.end
                   << ") out of bounds for text of length "
                   << response.text.size();
                issues.add(id, os.str());
            }
            if (span.label == HallucinationLabel::Consistent)
                issues.add(id, "span labeled Consistent");
        }
        if (!response.annotator_labels.empty()) {
            auto pooled = pool_gold_label(response.annotator_labels);
            if (!response.gold || *response.gold != pooled)
                issues.add(id, "gold label does not match pooled "
                               "annotator labels");
            if (pooled == HallucinationLabel::Consistent &&
                !response.spans.empty())
                issues.add(id, "gold Consistent but spans present");
        } else if (response.gold) {
            issues.add(id, "gold label present without annotator labels");
        }
    }
    issues.raise_if_any("bundle validation failed");
}

std::vector<BinaryExample> binary_eval_subset(const DatasetBundle& bundle) {
    std::vector<BinaryExample> out;
    for (const auto& [id, response] : bundle.responses) {
        if (!response.gold) continue;
        if (*response.gold == HallucinationLabel::Unwanted) {
            out.push_back({&response, BinaryClass::Inconsistent});
        } else if (*response.gold == HallucinationLabel::Consistent) {
            out.push_back({&response, BinaryClass::Consistent});
        }
    }
    return out;
}

BinaryClass leaderboard_gold(HallucinationLabel label) {
    return label == HallucinationLabel::Consistent
               ? BinaryClass::Consistent
               : BinaryClass::Inconsistent;
}

std::vector<SubsetSource> leaderboard_eval_subset(const DatasetBundle& bundle,
                                                  TaskKind task,
                                                  std::size_t cap) {
    if (cap == 0) throw UsageError("leaderboard subset cap must be positive");
    bool task_present = false;
    std::vector<SubsetSource> out;
    for (const auto& [id, doc] : bundle.sources) {  // id-ascending order
        if (doc.task != task) continue;
        task_present = true;
        SubsetSource entry;
        entry.source = &doc;
        entry.responses = bundle.responses_for(id);
        bool any_annotation = false;
        for (const auto* response : entry.responses) {
            if (!response->spans.empty() ||
                (response->gold &&
                 *response->gold != HallucinationLabel::Consistent)) {
                any_annotation = true;
                break;
            }
        }
        if (!any_annotation) continue;
        std::sort(entry.responses.begin(), entry.responses.end(),
                  [](const AnnotatedResponse* a, const AnnotatedResponse* b) {
                      return std::tie(a->generator, a->id) <
                             std::tie(b->generator, b->id);
                  });
        out.push_back(std::move(entry));
        if (out.size() == cap) break;
    }
    if (!task_present)
        throw UsageError("bundle has no sources for task '" +
                         std::string(task_name(task)) + "'");
    return out;
}

}  // namespace faitheval
