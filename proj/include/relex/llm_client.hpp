#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relex {

using WarningSink = std::function<void(std::string_view)>;
/// Writes "relex: warning: ..." to stderr.
void stderr_warning(std::string_view message);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_now_iso8601();

// ---------------------------------------------------------------------------
// Transport

struct HttpReply {
    int status = 0;
    std::string body;
};

/// Exponential backoff. Attempt n (1-based) that fails is followed by a sleep of
/// min(initial_backoff * multiplier^(n-1), max_backoff), unless it was the last.
struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{8000};
    /// Injected by tests to avoid real sleeping.
    std::function<void(std::chrono::milliseconds)> sleep;

    std::chrono::milliseconds backoff_after(int attempt) const;
};

/// 429 and 5xx are worth retrying; other non-2xx statuses are final.
bool is_retryable_status(int status) noexcept;

/// Runs `attempt` until it yields a 2xx reply. A thrown TransportError counts as a
/// retryable failure without a status. Throws TransportError carrying the last
/// status once the budget is spent or on a final status.
HttpReply with_retries(const std::function<HttpReply()>& attempt, const RetryPolicy& policy);

/// POSTs a JSON body to `url` ("http://host:port/path" or https). Bearer token is
/// taken from the RELEX_API_TOKEN environment variable when set.
class HttpJsonPoster {
public:
    explicit HttpJsonPoster(std::string url, std::chrono::seconds timeout = std::chrono::seconds(120));
    ~HttpJsonPoster();
    HttpJsonPoster(HttpJsonPoster&&) noexcept;
    HttpJsonPoster& operator=(HttpJsonPoster&&) noexcept;

    /// Throws TransportError when no response arrives.
    HttpReply post(const std::string& json_body) const;
    const std::string& url() const noexcept { return url_; }

private:
    struct Impl;
    std::string url_;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Generation

/// One decoding request. Defaults: greedy, 32 new tokens, stop at the first newline.
struct GenerationRequest {
    std::string model_id;
    std::string prompt;
    int max_new_tokens = 32;
    double temperature = 0.0;
    std::vector<std::string> stop_sequences{"\n"};

    /// SHA-256 (hex) of the compact JSON array
    /// [model_id, prompt, max_new_tokens, temperature, [stop...]].
    std::string request_key() const;
    /// Wire body: {"model","prompt","max_new_tokens","temperature","stop"}.
    std::string wire_body() const;
    /// Throws ConfigError for an empty model id, max_new_tokens < 1 or negative temperature.
    void validate() const;
};

struct GenerationResponse {
    std::string request_key;
    std::string raw_text;
    std::int64_t latency_ms = 0;
    bool from_cache = false;
};

/// Anything that accepts the generation wire body and replies with {"text": ...}.
class GenerationEndpoint {
public:
    virtual ~GenerationEndpoint() = default;
    virtual HttpReply post(const std::string& json_body) = 0;
    virtual std::string describe() const = 0;
};

class HttpGenerationEndpoint final : public GenerationEndpoint {
public:
    explicit HttpGenerationEndpoint(std::string url) : poster_(std::move(url)) {}
    HttpReply post(const std::string& json_body) override { return poster_.post(json_body); }
    std::string describe() const override { return poster_.url(); }

private:
    HttpJsonPoster poster_;
};

/// Offline endpoint. Maps prompt substrings to canned completions; the longest
/// matching substring wins, earlier rules win ties. Counts every call.
///
/// Fixture file: JSON lines of {"match": "...", "completion": "..."} and at most
/// one {"default": "..."} used when nothing matches. Without a default an
/// unmatched prompt gets HTTP 404.
class MockGenerationEndpoint final : public GenerationEndpoint {
public:
    struct Rule {
        std::string match;
        std::string completion;
    };

    MockGenerationEndpoint() = default;
    explicit MockGenerationEndpoint(std::vector<Rule> rules,
                                    std::optional<std::string> fallback = std::nullopt);
    static std::unique_ptr<MockGenerationEndpoint> from_file(const std::filesystem::path& fixture);

    HttpReply post(const std::string& json_body) override;
    std::string describe() const override { return "mock"; }

    /// Next `n` calls reply with `status` (0 simulates a dead connection).
    void fail_next(int n, int status = 503);
    std::size_t calls() const noexcept { return calls_.load(); }
    void reset_calls() noexcept { calls_ = 0; }

private:
    std::vector<Rule> rules_;
    std::optional<std::string> fallback_;
    std::atomic<std::size_t> calls_{0};
    std::atomic<int> pending_failures_{0};
    std::atomic<int> failure_status_{503};
};

/// Adapter over a callable, for tests and embedding into other harnesses.
class CallbackGenerationEndpoint final : public GenerationEndpoint {
public:
    using Handler = std::function<HttpReply(const std::string&)>;
    explicit CallbackGenerationEndpoint(Handler handler) : handler_(std::move(handler)) {}
    HttpReply post(const std::string& json_body) override {
        ++calls_;
        return handler_(json_body);
    }
    std::string describe() const override { return "callback"; }
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    Handler handler_;
    std::atomic<std::size_t> calls_{0};
};

/// "mock:<fixture-file>" or an http(s) URL.
std::unique_ptr<GenerationEndpoint> make_generation_endpoint(std::string_view spec);

/// Cuts `text` at the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop_sequences);

/// Sends one request with retries and returns the model text verbatim, apart
/// from stop-sequence truncation.
GenerationResponse generate(GenerationEndpoint& endpoint, const GenerationRequest& request,
                            const RetryPolicy& policy);

// ---------------------------------------------------------------------------
// Cache

/// Append-only JSONL response cache. Each line holds request_key, raw_text,
/// latency_ms, created_at and a checksum over key and text; lines that fail to
/// parse or verify are dropped at open with a warning. Writes are serialized,
/// reads are concurrent.
class ResponseCache {
public:
    struct Entry {
        std::string raw_text;
        std::int64_t latency_ms = 0;
    };

    explicit ResponseCache(std::filesystem::path path, WarningSink warn = stderr_warning);

    std::optional<Entry> get(const std::string& request_key) const;
    /// Write-once per key. Re-writing identical text is a no-op; different text
    /// throws CacheConflict.
    void put(const std::string& request_key, const std::string& raw_text, std::int64_t latency_ms);

    std::size_t size() const;
    std::size_t discarded_on_open() const noexcept { return discarded_; }
    const std::filesystem::path& path() const noexcept { return path_; }

    static std::string checksum(std::string_view request_key, std::string_view raw_text);

private:
    std::filesystem::path path_;
    WarningSink warn_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Entry> index_;
    std::ofstream out_;
    std::size_t discarded_ = 0;
};

/// Cache hit: stored response with from_cache = true, no endpoint call.
/// Miss: generate, persist, return with from_cache = false.
GenerationResponse cached_generate(ResponseCache& cache, GenerationEndpoint& endpoint,
                                   const GenerationRequest& request, const RetryPolicy& policy);

/// Thread-safe front end used by the runner: cache lookup, bounded in-flight
/// endpoint calls and an optional minimum spacing between dispatches.
class LlmClient {
public:
    struct Options {
        int max_in_flight = 4;
        std::chrono::milliseconds min_dispatch_interval{0};
        RetryPolicy retry;
    };

    LlmClient(GenerationEndpoint& endpoint, ResponseCache* cache, Options options);

    GenerationResponse complete(const GenerationRequest& request);

    std::size_t cache_hits() const noexcept { return hits_.load(); }
    std::size_t cache_misses() const noexcept { return misses_.load(); }

private:
    void pace();

    GenerationEndpoint& endpoint_;
    ResponseCache* cache_;
    Options options_;
    std::counting_semaphore<1024> in_flight_;
    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point next_dispatch_{};
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace relex
