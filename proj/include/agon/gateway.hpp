// Uniform chat-completion client with three backends: an OpenAI-style chat
// API, a Replicate-style prediction API (submit then poll), and a seeded
// deterministic mock for offline runs. Handles retries with exponential
// backoff, per-provider rate caps, and choice extraction from free text.
//
// The mock is a pure function of (model_name, seed, hash(prompt)) and is
// stable across processes. Decision templates quote the two valid reply
// lines as "CHOICE: <label>"; the mock harvests the labels from those quotes
// (first quote = Option A), honors FORCE:A / FORCE:B markers anywhere in the
// prompt, and otherwise picks a hash-derived label, so offline games produce
// varied but reproducible transcripts.

#pragma once

#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "agon/game.hpp"
#include "agon/util.hpp"

namespace agon {

enum class Provider { OpenAIStyle, ReplicateStyle, Mock };

inline const char* provider_key(Provider p) {
    switch (p) {
        case Provider::OpenAIStyle: return "openai";
        case Provider::ReplicateStyle: return "replicate";
        case Provider::Mock: return "mock";
    }
    return "mock";
}

struct MockSettings {
    double length_mean = 220.0;
    double length_sd = 60.0;
    int length_min = 40;
    int length_max = 600;
    int latency_ms = 0;                      // simulated per-call latency
    std::string fail_when_prompt_contains;   // fault injection hook for tests
};

struct ModelConfig {
    Provider provider = Provider::Mock;
    std::string model_name = "mock-model";
    double temperature = 1.0;
    double top_p = 1.0;
    std::string endpoint_url;
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    double requests_per_second_cap = 0.0;    // <= 0 means unlimited
    std::chrono::milliseconds backoff_initial{250};
    std::chrono::milliseconds poll_interval{1000};
    MockSettings mock;
};

struct ChatExchange {
    std::string prompt;
    std::string response_text;
    std::chrono::milliseconds latency{0};
    int attempt_count = 1;
    std::map<std::string, std::string> provider_metadata;
};

struct GatewayError : std::runtime_error {
    enum class Kind { Timeout, HttpStatus, RateLimited, MalformedResponse, NoChoiceFound, Setup };
    Kind kind;
    int http_status = 0;
    int attempt_count = 0;

    GatewayError(Kind k, const std::string& message, int status = 0)
        : std::runtime_error(message), kind(k), http_status(status) {}
};

inline const char* gateway_error_kind(GatewayError::Kind k) {
    switch (k) {
        case GatewayError::Kind::Timeout: return "Timeout";
        case GatewayError::Kind::HttpStatus: return "HttpStatus";
        case GatewayError::Kind::RateLimited: return "RateLimited";
        case GatewayError::Kind::MalformedResponse: return "MalformedResponse";
        case GatewayError::Kind::NoChoiceFound: return "NoChoiceFound";
        case GatewayError::Kind::Setup: return "Setup";
    }
    return "Unknown";
}

// Maps a response to one of the two localized labels. A trailing line of the
// exact form "CHOICE: <label>" wins; otherwise the label whose last
// occurrence is later in the text wins. Case folding is ASCII-only.
inline Choice parse_choice(std::string_view response, const std::string& label_a,
                           const std::string& label_b) {
    if (label_a.empty() || label_b.empty() || label_a == label_b)
        throw std::invalid_argument("parse_choice: labels must be nonempty and distinct");

    // Precedence: final non-empty line of the form CHOICE: <label>.
    std::string_view rest = response;
    while (!rest.empty()) {
        auto nl = rest.find_last_of('\n');
        std::string_view line = trim(nl == std::string_view::npos ? rest : rest.substr(nl + 1));
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(0, nl);
        if (line.empty()) continue;
        if (line.size() >= 7 && iequals_ascii(line.substr(0, 7), "CHOICE:")) {
            std::string_view value = trim(line.substr(7));
            while (!value.empty() && (value.back() == '.' || value.back() == '"' || value.back() == '\''))
                value.remove_suffix(1);
            while (!value.empty() && (value.front() == '"' || value.front() == '\''))
                value.remove_prefix(1);
            if (iequals_ascii(value, label_a)) return Choice::A;
            if (iequals_ascii(value, label_b)) return Choice::B;
        }
        break; // only the final non-empty line gets precedence treatment
    }

    const std::size_t pos_a = rfind_ci_ascii(response, label_a);
    const std::size_t pos_b = rfind_ci_ascii(response, label_b);
    if (pos_a == std::string_view::npos && pos_b == std::string_view::npos)
        throw GatewayError(GatewayError::Kind::NoChoiceFound,
                           "no option label found in response");
    if (pos_a == std::string_view::npos) return Choice::B;
    if (pos_b == std::string_view::npos) return Choice::A;
    if (pos_a != pos_b) return pos_a > pos_b ? Choice::A : Choice::B;
    return label_a.size() >= label_b.size() ? Choice::A : Choice::B;
}

inline std::chrono::milliseconds backoff_delay(const ModelConfig& cfg, int attempt) {
    auto delay = cfg.backoff_initial;
    for (int i = 0; i < attempt; ++i) {
        delay *= 2;
        if (delay > std::chrono::milliseconds(10000)) return std::chrono::milliseconds(10000);
    }
    return delay;
}

namespace detail {

// "scheme://host[:port]/prefix" -> (scheme://host:port, /prefix)
inline std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw GatewayError(GatewayError::Kind::Setup, "endpoint_url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

inline std::string require_env(const char* name) {
    const char* value = std::getenv(name);
    if (!value || !*value)
        throw GatewayError(GatewayError::Kind::Setup,
                           std::string("missing credential environment variable ") + name);
    return value;
}

inline GatewayError map_transport_error(httplib::Error err) {
    return GatewayError(GatewayError::Kind::Timeout,
                        std::string("transport failure: ") + httplib::to_string(err));
}

// Labels quoted after "CHOICE: " in the prompt, in order of first appearance.
inline std::vector<std::string> harvest_choice_labels(std::string_view prompt) {
    static constexpr std::string_view marker = "CHOICE: ";
    std::vector<std::string> labels;
    for (std::size_t pos = prompt.find(marker); pos != std::string_view::npos;
         pos = prompt.find(marker, pos + marker.size())) {
        std::size_t start = pos + marker.size();
        std::size_t end = start;
        while (end < prompt.size() && prompt[end] != '"' && prompt[end] != '\n' && prompt[end] != '\r')
            ++end;
        std::string label(trim(prompt.substr(start, end - start)));
        if (label.empty() || label.find('{') != std::string::npos) continue;
        bool seen = false;
        for (const auto& existing : labels) seen = seen || existing == label;
        if (!seen) labels.push_back(std::move(label));
    }
    return labels;
}

inline const std::vector<std::string>& mock_word_pool() {
    static const std::vector<std::string> pool = {
        "trust",    "penalty",  "reward",    "together", "fair",    "agree",   "propose",
        "round",    "benefit",  "promise",   "outcome",  "mutual",  "strategy","signal",
        "share",    "risk",     "gain",      "steady",   "commit",  "honest",  "plan",
        "match",    "align",    "prefer",    "accept",   "offer",   "keep",    "both",
        "best",     "total",    "stable",    "repeat",   "cautious","bold",    "open",
        "balance",  "exchange", "cooperate", "respond",  "expect",  "value",   "intend",
        "final",    "early",    "later",     "careful",  "direct",  "clear",
    };
    return pool;
}

} // namespace detail

// Shared across concurrent game executions; throttling state is internally
// synchronized and completion calls block the caller.
class Gateway {
public:
    // Blocks until the per-provider token interval admits one request.
    void throttle(const ModelConfig& cfg) {
        if (cfg.requests_per_second_cap <= 0.0) return;
        const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / cfg.requests_per_second_cap));
        Bucket& bucket = bucket_for(bucket_key(cfg));
        std::chrono::steady_clock::time_point admit;
        {
            std::lock_guard<std::mutex> lock(bucket.mutex);
            const auto now = std::chrono::steady_clock::now();
            admit = bucket.next_admission < now ? now : bucket.next_admission;
            bucket.next_admission = admit + interval;
        }
        std::this_thread::sleep_until(admit);
    }

    // mock_seed only affects the mock provider; remote providers ignore it.
    ChatExchange complete(const ModelConfig& cfg, const std::string& prompt,
                          std::uint64_t mock_seed = 0) {
        if (prompt.empty()) throw std::invalid_argument("complete: prompt must be nonempty");
        GatewayError last(GatewayError::Kind::Timeout, "no attempts made");
        const auto started = std::chrono::steady_clock::now();
        for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
            throttle(cfg);
            try {
                ChatExchange ex = dispatch(cfg, prompt, mock_seed);
                ex.prompt = prompt;
                ex.attempt_count = attempt + 1;
                ex.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started);
                return ex;
            } catch (GatewayError& err) {
                err.attempt_count = attempt + 1;
                if (!retryable(err)) throw;
                last = err;
                if (attempt < cfg.max_retries)
                    std::this_thread::sleep_for(backoff_delay(cfg, attempt));
            }
        }
        throw last;
    }

private:
    struct Bucket {
        std::mutex mutex;
        std::chrono::steady_clock::time_point next_admission{};
    };

    // Client errors other than 429 will not heal on retry.
    static bool retryable(const GatewayError& err) {
        switch (err.kind) {
            case GatewayError::Kind::Setup: return false;
            case GatewayError::Kind::HttpStatus:
                return err.http_status >= 500 || err.http_status == 0;
            default: return true;
        }
    }

    static std::string bucket_key(const ModelConfig& cfg) {
        return std::string(provider_key(cfg.provider)) + "|" + cfg.endpoint_url + "|" + cfg.model_name;
    }

    Bucket& bucket_for(const std::string& key) {
        std::lock_guard<std::mutex> lock(buckets_mutex_);
        return buckets_[key]; // std::map nodes are address-stable
    }

    ChatExchange dispatch(const ModelConfig& cfg, const std::string& prompt, std::uint64_t mock_seed) {
        switch (cfg.provider) {
            case Provider::Mock: return mock_complete(cfg, prompt, mock_seed);
            case Provider::OpenAIStyle: return openai_complete(cfg, prompt);
            case Provider::ReplicateStyle: return replicate_complete(cfg, prompt);
        }
        throw GatewayError(GatewayError::Kind::Setup, "unknown provider");
    }

    static ChatExchange mock_complete(const ModelConfig& cfg, const std::string& prompt,
                                      std::uint64_t seed) {
        const MockSettings& mock = cfg.mock;
        if (!mock.fail_when_prompt_contains.empty() &&
            prompt.find(mock.fail_when_prompt_contains) != std::string::npos)
            throw GatewayError(GatewayError::Kind::MalformedResponse, "mock failure injected");
        if (mock.latency_ms > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(mock.latency_ms));

        const std::uint64_t base = mix_seeds({seed, fnv1a64(cfg.model_name), fnv1a64(prompt)});
        Rng rng(base);

        // Irwin-Hall approximation of a normal draw for the target length.
        double z = -6.0;
        for (int i = 0; i < 12; ++i) z += rng.next_unit();
        int target = static_cast<int>(mock.length_mean + z * mock.length_sd);
        if (target < mock.length_min) target = mock.length_min;
        if (target > mock.length_max) target = mock.length_max;

        const auto& pool = detail::mock_word_pool();
        std::string body;
        while (static_cast<int>(body.size()) < target) {
            const std::size_t words = 4 + rng.next_below(7);
            std::string sentence;
            for (std::size_t w = 0; w < words; ++w) {
                if (w > 0) sentence.push_back(' ');
                sentence += pool[rng.next_below(pool.size())];
            }
            sentence[0] = static_cast<char>(sentence[0] - 'a' + 'A');
            if (!body.empty()) body.push_back(' ');
            body += sentence + ".";
        }

        ChatExchange ex;
        ex.response_text = std::move(body);
        const auto labels = detail::harvest_choice_labels(prompt);
        if (labels.size() >= 2) {
            std::size_t pick;
            if (prompt.find("FORCE:A") != std::string::npos)
                pick = 0;
            else if (prompt.find("FORCE:B") != std::string::npos)
                pick = 1;
            else
                pick = splitmix64(base ^ 0xc0ffee) & 1;
            ex.response_text += "\nCHOICE: " + labels[pick];
        }
        ex.provider_metadata["provider"] = "mock";
        return ex;
    }

    static ChatExchange openai_complete(const ModelConfig& cfg, const std::string& prompt) {
        const std::string api_key = detail::require_env("AGON_OPENAI_API_KEY");
        auto [base, prefix] = detail::split_endpoint(cfg.endpoint_url);
        httplib::Client client(base);
        configure(client, cfg);

        nlohmann::json request = {
            {"model", cfg.model_name},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", cfg.temperature},
            {"top_p", cfg.top_p},
        };
        httplib::Headers headers{{"Authorization", "Bearer " + api_key}};
        auto res = client.Post(prefix + "/chat/completions", headers, request.dump(),
                               "application/json");
        if (!res) throw detail::map_transport_error(res.error());
        check_status(res->status);
        try {
            nlohmann::json parsed = nlohmann::json::parse(res->body);
            ChatExchange ex;
            ex.response_text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
            ex.provider_metadata["status"] = std::to_string(res->status);
            return ex;
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayError::Kind::MalformedResponse,
                               std::string("bad chat completion payload: ") + e.what());
        }
    }

    static ChatExchange replicate_complete(const ModelConfig& cfg, const std::string& prompt) {
        const std::string token = detail::require_env("AGON_REPLICATE_API_TOKEN");
        auto [base, prefix] = detail::split_endpoint(cfg.endpoint_url);
        httplib::Client client(base);
        configure(client, cfg);
        httplib::Headers headers{{"Authorization", "Bearer " + token}};

        nlohmann::json request = {{"input",
                                   {{"prompt", prompt},
                                    {"temperature", cfg.temperature},
                                    {"top_p", cfg.top_p}}}};
        auto res = client.Post(prefix + "/models/" + cfg.model_name + "/predictions", headers,
                               request.dump(), "application/json");
        if (!res) throw detail::map_transport_error(res.error());
        check_status(res->status);

        const auto deadline = std::chrono::steady_clock::now() + cfg.timeout;
        try {
            nlohmann::json prediction = nlohmann::json::parse(res->body);
            std::string id = prediction.at("id").get<std::string>();
            std::string status = prediction.value("status", "starting");
            while (status != "succeeded" && status != "failed" && status != "canceled") {
                if (std::chrono::steady_clock::now() > deadline)
                    throw GatewayError(GatewayError::Kind::Timeout,
                                       "prediction did not reach a terminal status in time");
                std::this_thread::sleep_for(cfg.poll_interval);
                auto poll = client.Get(prefix + "/predictions/" + id, headers);
                if (!poll) throw detail::map_transport_error(poll.error());
                check_status(poll->status);
                prediction = nlohmann::json::parse(poll->body);
                status = prediction.value("status", status);
            }
            if (status != "succeeded")
                throw GatewayError(GatewayError::Kind::MalformedResponse,
                                   "prediction ended with status " + status);
            std::string text;
            const auto& output = prediction.at("output");
            if (output.is_string()) {
                text = output.get<std::string>();
            } else {
                for (const auto& piece : output) text += piece.get<std::string>();
            }
            ChatExchange ex;
            ex.response_text = std::move(text);
            ex.provider_metadata["prediction_id"] = id;
            return ex;
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayError::Kind::MalformedResponse,
                               std::string("bad prediction payload: ") + e.what());
        }
    }

    static void configure(httplib::Client& client, const ModelConfig& cfg) {
        const auto seconds =
            std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout).count();
        const auto micros =
            std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout).count() %
            1000000;
        client.set_connection_timeout(static_cast<time_t>(seconds), static_cast<time_t>(micros));
        client.set_read_timeout(static_cast<time_t>(seconds), static_cast<time_t>(micros));
        client.set_write_timeout(static_cast<time_t>(seconds), static_cast<time_t>(micros));
    }

    static void check_status(int status) {
        if (status == 200 || status == 201) return;
        if (status == 429)
            throw GatewayError(GatewayError::Kind::RateLimited, "rate limited by provider", status);
        throw GatewayError(GatewayError::Kind::HttpStatus,
                           "unexpected HTTP status " + std::to_string(status), status);
    }

    std::mutex buckets_mutex_;
    std::map<std::string, Bucket> buckets_;
};

} // namespace agon
