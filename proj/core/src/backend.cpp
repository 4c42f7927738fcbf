#include "faitheval/backend.hpp"

#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faitheval/errors.hpp"

namespace faitheval {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path prefix, no trailing slash
};

ParsedUrl parse_url(const std::string& url, const std::string& backend_id) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)",
                                   std::regex::icase);
    std::smatch match;
    if (!std::regex_match(url, match, url_re))
        throw ProtocolError(backend_id, "cannot parse endpoint URL: " + url);
    ParsedUrl parsed;
    parsed.origin = match[1].str();
    parsed.path = match[2].matched ? match[2].str() : "";
    while (!parsed.path.empty() && parsed.path.back() == '/')
        parsed.path.pop_back();
    return parsed;
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace

struct HttpChatClient::Impl {
    ParsedUrl url;
    std::unique_ptr<httplib::Client> client;
};

HttpChatClient::HttpChatClient(BackendSpec spec)
    : spec_(std::move(spec)), impl_(std::make_unique<Impl>()) {
    impl_->url = parse_url(spec_.endpoint, spec_.id);
    impl_->client = std::make_unique<httplib::Client>(impl_->url.origin);
    const auto secs =
        std::chrono::duration_cast<std::chrono::seconds>(spec_.timeout);
    impl_->client->set_connection_timeout(secs.count(), 0);
    impl_->client->set_read_timeout(secs.count(), 0);
    impl_->client->set_write_timeout(secs.count(), 0);
}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::complete_once(const PromptBundle& prompt) {
    const char* token = nullptr;
    if (!spec_.auth_env.empty()) {
        token = std::getenv(spec_.auth_env.c_str());
        if (!token || !*token)
            throw MissingCredentialsError(
                spec_.id, "environment variable " + spec_.auth_env +
                              " is not set");
    }

    json messages = json::array();
    for (const auto& message : prompt.messages) {
        messages.push_back(
            {{"role", message.role == Role::System ? "system" : "user"},
             {"content", message.text}});
    }
    json body = {
        {"model", spec_.model_name},
        {"messages", std::move(messages)},
        {"temperature", prompt.decoding.temperature},
        {"max_tokens", prompt.decoding.max_output_tokens},
    };

    httplib::Headers headers;
    if (token) headers.emplace("Authorization", std::string("Bearer ") + token);

    auto result = impl_->client->Post(impl_->url.path + "/chat/completions",
                                      headers, body.dump(),
                                      "application/json");
    if (!result)
        throw TransientBackendError(
            spec_.id, "connection failed: " +
                          httplib::to_string(result.error()));
    if (result->status != 200) {
        std::string detail = "HTTP " + std::to_string(result->status);
        if (!result->body.empty())
            detail += ": " + result->body.substr(0, 400);
        if (retryable_status(result->status))
            throw TransientBackendError(spec_.id, detail);
        throw ProtocolError(spec_.id, detail);
    }

    try {
        json response = json::parse(result->body);
        return response.at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const json::exception& e) {
        throw ProtocolError(spec_.id,
                            std::string("malformed completion response: ") +
                                e.what());
    }
}

BackendSpec MockChatClient::mock_spec(std::string id) {
    BackendSpec spec;
    spec.id = std::move(id);
    spec.endpoint = "mock://local";
    spec.model_name = "mock-model";
    spec.max_parallel = 8;
    spec.retry.base_backoff = std::chrono::milliseconds(1);
    return spec;
}

MockChatClient::MockChatClient(Script script, BackendSpec spec,
                               MockStats* stats)
    : script_(std::move(script)), spec_(std::move(spec)), stats_(stats) {}

void MockChatClient::fail_next(int n, bool transient) {
    std::lock_guard lock(mutex_);
    failures_left_ = n;
    failures_transient_ = transient;
}

std::string MockChatClient::complete_once(const PromptBundle& prompt) {
    auto enter = [](MockStats& stats) {
        stats.calls.fetch_add(1);
        int now = stats.in_flight.fetch_add(1) + 1;
        int seen = stats.max_in_flight.load();
        while (now > seen &&
               !stats.max_in_flight.compare_exchange_weak(seen, now)) {
        }
    };
    enter(local_stats_);
    if (stats_) enter(*stats_);
    struct Exit {
        MockStats* a;
        MockStats* b;
        ~Exit() {
            a->in_flight.fetch_sub(1);
            if (b) b->in_flight.fetch_sub(1);
        }
    } exit{&local_stats_, stats_};

    {
        std::lock_guard lock(mutex_);
        if (failures_left_ > 0) {
            --failures_left_;
            if (failures_transient_)
                throw TransientBackendError(spec_.id, "scripted failure");
            throw ProtocolError(spec_.id, "scripted protocol failure");
        }
    }
    return script_(prompt);
}

}  // namespace faitheval
