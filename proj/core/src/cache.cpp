#include "faitheval/cache.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faitheval/errors.hpp"
#include "faitheval/hash.hpp"

namespace faitheval {

using nlohmann::json;

namespace {

std::string now_iso8601_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string DiskCache::request_key(const BackendSpec& spec,
                                   const PromptBundle& prompt) {
    std::ostringstream os;
    os << "fe-cache-v1\n";
    os << "backend:" << spec.id << "\n";
    os << "model:" << spec.model_name << "\n";
    os << "prompt:" << prompt.content_hash << "\n";
    os << "temperature:" << prompt.decoding.temperature << "\n";
    os << "max_output_tokens:" << prompt.decoding.max_output_tokens << "\n";
    return sha256_hex(os.str());
}

std::optional<CacheRecord> DiskCache::get(const std::string& key) const {
    auto path = dir_ / (key + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    try {
        json record = json::parse(in);
        CacheRecord out;
        out.key = record.at("key").get<std::string>();
        out.raw_output = record.at("raw_output").get<std::string>();
        out.created_at = record.value("created_at", std::string());
        if (record.contains("usage") && record["usage"].is_object()) {
            TokenUsage usage;
            usage.prompt_tokens =
                record["usage"].value("prompt_tokens", std::int64_t{0});
            usage.completion_tokens =
                record["usage"].value("completion_tokens", std::int64_t{0});
            out.usage = usage;
        }
        if (out.key != key) {
            spdlog::warn("cache file {} holds key {}; ignoring",
                         path.string(), out.key);
            return std::nullopt;
        }
        return out;
    } catch (const json::exception& e) {
        spdlog::warn("unreadable cache file {}: {}", path.string(), e.what());
        return std::nullopt;
    }
}

void DiskCache::put(const CacheRecord& record) const {
    json body = {
        {"key", record.key},
        {"raw_output", record.raw_output},
        {"created_at",
         record.created_at.empty() ? now_iso8601_utc() : record.created_at},
    };
    if (record.usage) {
        body["usage"] = {{"prompt_tokens", record.usage->prompt_tokens},
                         {"completion_tokens",
                          record.usage->completion_tokens}};
    }
    auto final_path = dir_ / (record.key + ".json");
    auto tmp_path = dir_ / (record.key + ".tmp." +
                            std::to_string(std::hash<std::thread::id>{}(
                                std::this_thread::get_id())));
    {
        std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw UsageError("cannot write cache file " + tmp_path.string());
        out << body.dump(2) << "\n";
    }
    std::filesystem::rename(tmp_path, final_path);
}

std::string complete(ChatClient& client, const PromptBundle& prompt,
                     DiskCache* cache, bool* cache_hit) {
    if (cache_hit) *cache_hit = false;
    std::string key;
    if (cache) {
        key = DiskCache::request_key(client.spec(), prompt);
        if (auto record = cache->get(key)) {
            if (cache_hit) *cache_hit = true;
            return record->raw_output;
        }
    }

    const auto& retry = client.spec().retry;
    const int attempts = std::max(1, retry.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            std::string raw = client.complete_once(prompt);
            if (cache) cache->put({key, raw, "", std::nullopt});
            return raw;
        } catch (const TransientBackendError& e) {
            if (attempt >= attempts)
                throw RetriesExhaustedError(
                    client.spec().id,
                    "gave up after " + std::to_string(attempt) +
                        " attempt(s); last error: " + e.what());
            auto delay = retry.base_backoff * (1 << (attempt - 1));
            spdlog::debug("backend '{}' attempt {}/{} failed ({}); retrying "
                          "in {} ms",
                          client.spec().id, attempt, attempts, e.what(),
                          delay.count());
            std::this_thread::sleep_for(delay);
        }
        // MissingCredentialsError and ProtocolError propagate unchanged.
    }
}

}  // namespace faitheval
