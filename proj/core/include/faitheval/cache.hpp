#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "faitheval/backend.hpp"
#include "faitheval/promptkit.hpp"

namespace faitheval {

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

/// One cached completion. `key` is the content hash of
/// (backend id, model name, prompt hash, decoding); identical keys imply an
/// identical canonicalized request, so rewrites are idempotent.
struct CacheRecord {
    std::string key;
    std::string raw_output;
    std::string created_at;  // ISO-8601 UTC
    std::optional<TokenUsage> usage;
};

/// Content-addressed on-disk cache: one JSON file per key, named by the hex
/// digest. Writes go through a temp file + rename, so concurrent writers of
/// the same key are last-write-wins with identical content.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path dir);

    static std::string request_key(const BackendSpec& spec,
                                   const PromptBundle& prompt);

    std::optional<CacheRecord> get(const std::string& key) const;
    void put(const CacheRecord& record) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

/// Cache-first completion with retry/backoff orchestration. On transient
/// failures retries up to spec().retry.max_attempts with exponential
/// backoff; successful completions populate the cache.
std::string complete(ChatClient& client, const PromptBundle& prompt,
                     DiskCache* cache = nullptr, bool* cache_hit = nullptr);

}  // namespace faitheval
