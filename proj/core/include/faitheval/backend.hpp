#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "faitheval/promptkit.hpp"

namespace faitheval {

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{250};
};

struct BackendSpec {
    std::string id;
    std::string endpoint;    // base URL, e.g. https://api.example.com/v1
    std::string model_name;
    std::string auth_env;    // env var holding the bearer token
    int max_parallel = 4;
    RetryPolicy retry;
    std::chrono::milliseconds timeout{60000};
};

/// One chat-completion attempt against a backend. Implementations throw
/// TransientBackendError for retryable conditions; retries and caching live
/// in complete() below so they apply uniformly to real and mock clients.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete_once(const PromptBundle& prompt) = 0;
    virtual const BackendSpec& spec() const = 0;
};

/// OpenAI-compatible chat-completions client: POST
/// {model, messages[{role, content}], temperature, max_tokens} to
/// <endpoint>/chat/completions, bearer token from spec().auth_env.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(BackendSpec spec);
    ~HttpChatClient() override;

    std::string complete_once(const PromptBundle& prompt) override;
    const BackendSpec& spec() const override { return spec_; }

private:
    BackendSpec spec_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Instrumentation shared by tests: completed calls, concurrency high-water
/// mark.
struct MockStats {
    std::atomic<int> calls{0};
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
};

/// Scriptable in-process backend. The script sees the full PromptBundle
/// (including meta) and returns the raw assistant text.
class MockChatClient : public ChatClient {
public:
    using Script = std::function<std::string(const PromptBundle&)>;

    static BackendSpec mock_spec(std::string id = "mock");

    explicit MockChatClient(Script script, BackendSpec spec = mock_spec(),
                            MockStats* stats = nullptr);

    /// The next `n` calls throw (transient by default) before the script
    /// runs again.
    void fail_next(int n, bool transient = true);

    std::string complete_once(const PromptBundle& prompt) override;
    const BackendSpec& spec() const override { return spec_; }

    int calls() const { return local_stats_.calls.load(); }
    int max_in_flight() const { return local_stats_.max_in_flight.load(); }

private:
    Script script_;
    BackendSpec spec_;
    MockStats* stats_;
    MockStats local_stats_;
    std::mutex mutex_;
    int failures_left_ = 0;
    bool failures_transient_ = true;
};

}  // namespace faitheval
