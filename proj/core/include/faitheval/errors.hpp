#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace faitheval {

/// One offending record discovered during ingestion or validation.
struct RecordIssue {
    std::string where;  // "file:line" or a record id
    std::string what;
};

/// Corpus ingestion/validation failure. Carries every offending record,
/// not just the first one.
class CorpusError : public std::runtime_error {
public:
    CorpusError(const std::string& summary, std::vector<RecordIssue> issues);
    const std::vector<RecordIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<RecordIssue> issues_;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PromptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A metric whose denominator is empty (e.g. recall over a gold class with
/// zero items). Raised instead of silently reporting 0.
class DegenerateMetricError : public MetricsError {
public:
    using MetricsError::MetricsError;
};

/// Base for all backend failures; always names the backend.
class BackendError : public std::runtime_error {
public:
    BackendError(std::string backend_id, const std::string& what);
    const std::string& backend_id() const noexcept { return backend_id_; }

private:
    std::string backend_id_;
};

/// Retryable condition (connection failure, 429/5xx, timeout).
class TransientBackendError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Non-retryable protocol failure (malformed response, 4xx other than 429).
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

class MissingCredentialsError : public BackendError {
public:
    using BackendError::BackendError;
};

/// All retry attempts were consumed without a successful completion.
class RetriesExhaustedError : public BackendError {
public:
    using BackendError::BackendError;
};

class DetectorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace faitheval
