#include "relex/llm_client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "relex/dataset.hpp"
#include "relex/error.hpp"
#include "relex/hashing.hpp"

namespace relex {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void stderr_warning(std::string_view message) {
    std::cerr << "relex: warning: " << message << '\n';
}

// ---------------------------------------------------------------------------
// Retry

std::chrono::milliseconds RetryPolicy::backoff_after(int attempt) const {
    const double scaled = static_cast<double>(initial_backoff.count()) *
                          std::pow(multiplier, std::max(0, attempt - 1));
    const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

bool is_retryable_status(int status) noexcept { return status == 429 || status >= 500; }

HttpReply with_retries(const std::function<HttpReply()>& attempt, const RetryPolicy& policy) {
    const int budget = std::max(1, policy.max_attempts);
    int last_status = 0;
    std::string last_error;
    for (int n = 1; n <= budget; ++n) {
        try {
            auto reply = attempt();
            if (reply.status >= 200 && reply.status < 300) return reply;
            last_status = reply.status;
            last_error = "HTTP " + std::to_string(reply.status);
            if (!is_retryable_status(reply.status)) {
                throw TransportError("endpoint replied " + last_error + ": " + reply.body.substr(0, 200),
                                     reply.status, n);
            }
        } catch (const TransportError& e) {
            if (e.status() != 0 && !is_retryable_status(e.status())) throw;
            last_error = e.what();
        }
        if (n < budget) {
            const auto delay = policy.backoff_after(n);
            if (policy.sleep) policy.sleep(delay);
            else std::this_thread::sleep_for(delay);
        }
    }
    throw TransportError("request failed after " + std::to_string(budget) + " attempts; last error: " +
                             last_error,
                         last_status, budget);
}

// ---------------------------------------------------------------------------
// HTTP

struct HttpJsonPoster::Impl {
    std::string origin;
    std::string path;
    std::string token;
    std::chrono::seconds timeout;
};

HttpJsonPoster::HttpJsonPoster(std::string url, std::chrono::seconds timeout)
    : url_(std::move(url)), impl_(std::make_unique<Impl>()) {
    const auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + url_);
    const auto scheme = url_.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme: " + scheme);
    const auto path_begin = url_.find('/', scheme_end + 3);
    impl_->origin = url_.substr(0, path_begin);
    impl_->path = path_begin == std::string::npos ? "/" : url_.substr(path_begin);
    impl_->timeout = timeout;
    if (!httplib::Client(impl_->origin).is_valid()) throw ConfigError("invalid endpoint URL: " + url_);
    if (const char* token = std::getenv("RELEX_API_TOKEN"); token && *token) impl_->token = token;
}

HttpJsonPoster::~HttpJsonPoster() = default;
HttpJsonPoster::HttpJsonPoster(HttpJsonPoster&&) noexcept = default;
HttpJsonPoster& HttpJsonPoster::operator=(HttpJsonPoster&&) noexcept = default;

HttpReply HttpJsonPoster::post(const std::string& json_body) const {
    // httplib serializes requests per client object; one client per call keeps
    // concurrent callers independent.
    httplib::Client client(impl_->origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(impl_->timeout);
    client.set_write_timeout(impl_->timeout);
    httplib::Headers headers;
    if (!impl_->token.empty()) headers.emplace("Authorization", "Bearer " + impl_->token);
    auto res = client.Post(impl_->path, headers, json_body, "application/json");
    if (!res) {
        throw TransportError("POST " + url_ + " failed: " + httplib::to_string(res.error()));
    }
    return HttpReply{res->status, res->body};
}

// ---------------------------------------------------------------------------
// Requests

std::string GenerationRequest::request_key() const {
    const nlohmann::json key = {model_id, prompt, max_new_tokens, temperature, stop_sequences};
    return sha256_hex(key.dump());
}

std::string GenerationRequest::wire_body() const {
    nlohmann::ordered_json j;
    j["model"] = model_id;
    j["prompt"] = prompt;
    j["max_new_tokens"] = max_new_tokens;
    j["temperature"] = temperature;
    j["stop"] = stop_sequences;
    return j.dump();
}

void GenerationRequest::validate() const {
    if (model_id.empty()) throw ConfigError("generation request without model id");
    if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be positive");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be non-negative");
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop_sequences) {
    auto cut = text.size();
    for (const auto& stop : stop_sequences) {
        if (stop.empty()) continue;
        cut = std::min(cut, text.find(stop));
    }
    text.resize(cut);
    return text;
}

GenerationResponse generate(GenerationEndpoint& endpoint, const GenerationRequest& request,
                            const RetryPolicy& policy) {
    request.validate();
    const auto body = request.wire_body();
    const auto start = std::chrono::steady_clock::now();
    const auto reply = with_retries([&] { return endpoint.post(body); }, policy);
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);

    if (reply.body.empty()) throw ProtocolError(endpoint.describe() + " returned an empty body");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(reply.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(endpoint.describe() + " returned non-JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        throw ProtocolError(endpoint.describe() + " reply lacks a string \"text\" field");
    }
    return GenerationResponse{request.request_key(),
                              truncate_at_stop(j["text"].get<std::string>(), request.stop_sequences),
                              latency.count(), false};
}

// ---------------------------------------------------------------------------
// Mock endpoint

MockGenerationEndpoint::MockGenerationEndpoint(std::vector<Rule> rules,
                                               std::optional<std::string> fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

std::unique_ptr<MockGenerationEndpoint> MockGenerationEndpoint::from_file(const std::filesystem::path& fixture) {
    const auto text = read_file(fixture);
    std::vector<Rule> rules;
    std::optional<std::string> fallback;
    std::size_t line_no = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        ++line_no;
        const std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.contains("default")) {
                fallback = j.at("default").get<std::string>();
            } else {
                rules.push_back({j.at("match").get<std::string>(), j.at("completion").get<std::string>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fixture.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return std::make_unique<MockGenerationEndpoint>(std::move(rules), std::move(fallback));
}

void MockGenerationEndpoint::fail_next(int n, int status) {
    failure_status_ = status;
    pending_failures_ = n;
}

HttpReply MockGenerationEndpoint::post(const std::string& json_body) {
    ++calls_;
    if (int left = pending_failures_.load(); left > 0) {
        pending_failures_.compare_exchange_strong(left, left - 1);
        if (failure_status_ == 0) throw TransportError("mock: connection refused");
        return HttpReply{failure_status_, "mock failure"};
    }
    std::string prompt;
    try {
        prompt = nlohmann::json::parse(json_body).at("prompt").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        return HttpReply{400, std::string("bad request: ") + e.what()};
    }
    const Rule* best = nullptr;
    for (const auto& rule : rules_) {
        if ((!best || rule.match.size() > best->match.size()) &&
            prompt.find(rule.match) != std::string::npos) {
            best = &rule;
        }
    }
    if (!best && !fallback_) return HttpReply{404, "mock: no rule matches the prompt"};
    return HttpReply{200, nlohmann::json{{"text", best ? best->completion : *fallback_}}.dump()};
}

std::unique_ptr<GenerationEndpoint> make_generation_endpoint(std::string_view spec) {
    if (spec.starts_with("mock:")) {
        return MockGenerationEndpoint::from_file(std::string(spec.substr(5)));
    }
    if (spec.starts_with("http://") || spec.starts_with("https://")) {
        return std::make_unique<HttpGenerationEndpoint>(std::string(spec));
    }
    throw ConfigError("generation endpoint must be mock:<file> or an http(s) URL, got '" +
                      std::string(spec) + "'");
}

// ---------------------------------------------------------------------------
// Cache

std::string ResponseCache::checksum(std::string_view request_key, std::string_view raw_text) {
    std::string buf;
    buf.reserve(request_key.size() + raw_text.size() + 1);
    buf.append(request_key);
    buf.push_back('\0');
    buf.append(raw_text);
    return sha256_hex(buf);
}

ResponseCache::ResponseCache(std::filesystem::path path, WarningSink warn)
    : path_(std::move(path)), warn_(std::move(warn)) {
    if (std::filesystem::exists(path_)) {
        const auto text = read_file(path_);
        std::size_t line_no = 0;
        for (std::size_t pos = 0; pos < text.size();) {
            auto nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            ++line_no;
            const std::string_view line(text.data() + pos, nl - pos);
            pos = nl + 1;
            if (line.empty()) continue;
            std::string problem;
            try {
                const auto j = nlohmann::json::parse(line);
                auto key = j.at("request_key").get<std::string>();
                auto raw = j.at("raw_text").get<std::string>();
                if (j.at("checksum").get<std::string>() != checksum(key, raw)) {
                    problem = "checksum mismatch";
                } else {
                    index_.try_emplace(std::move(key), Entry{std::move(raw), j.at("latency_ms").get<std::int64_t>()});
                }
            } catch (const nlohmann::json::exception& e) {
                problem = e.what();
            }
            if (!problem.empty()) {
                ++discarded_;
                if (warn_) {
                    warn_(path_.string() + ":" + std::to_string(line_no) +
                          ": discarding corrupt cache entry (" + problem + ")");
                }
            }
        }
        // A torn final write leaves no trailing newline; start appending on a fresh line.
        if (!text.empty() && text.back() != '\n') {
            std::ofstream(path_, std::ios::binary | std::ios::app) << '\n';
        }
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw Error("cannot open cache file " + path_.string());
}

std::optional<ResponseCache::Entry> ResponseCache::get(const std::string& request_key) const {
    std::shared_lock lock(mutex_);
    auto it = index_.find(request_key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const std::string& request_key, const std::string& raw_text,
                        std::int64_t latency_ms) {
    std::unique_lock lock(mutex_);
    if (auto it = index_.find(request_key); it != index_.end()) {
        if (it->second.raw_text == raw_text) return;
        throw CacheConflict("cache key " + request_key + " already holds a different response");
    }
    nlohmann::ordered_json j;
    j["request_key"] = request_key;
    j["raw_text"] = raw_text;
    j["latency_ms"] = latency_ms;
    j["created_at"] = utc_now_iso8601();
    j["checksum"] = checksum(request_key, raw_text);
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw Error("cache write failed for " + path_.string());
    index_.emplace(request_key, Entry{raw_text, latency_ms});
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mutex_);
    return index_.size();
}

GenerationResponse cached_generate(ResponseCache& cache, GenerationEndpoint& endpoint,
                                   const GenerationRequest& request, const RetryPolicy& policy) {
    const auto key = request.request_key();
    if (auto hit = cache.get(key)) return GenerationResponse{key, hit->raw_text, hit->latency_ms, true};
    auto response = generate(endpoint, request, policy);
    cache.put(key, response.raw_text, response.latency_ms);
    return response;
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(GenerationEndpoint& endpoint, ResponseCache* cache, Options options)
    : endpoint_(endpoint),
      cache_(cache),
      options_(std::move(options)),
      in_flight_(std::clamp(options_.max_in_flight, 1, 1024)) {}

void LlmClient::pace() {
    if (options_.min_dispatch_interval.count() <= 0) return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(pace_mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_dispatch_);
        next_dispatch_ = slot + options_.min_dispatch_interval;
    }
    std::this_thread::sleep_until(slot);
}

GenerationResponse LlmClient::complete(const GenerationRequest& request) {
    const auto key = request.request_key();
    if (cache_) {
        if (auto hit = cache_->get(key)) {
            ++hits_;
            return GenerationResponse{key, hit->raw_text, hit->latency_ms, true};
        }
    }
    ++misses_;
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& sem;
        ~Release() { sem.release(); }
    } release{in_flight_};
    pace();
    auto response = generate(endpoint_, request, options_.retry);
    if (cache_) cache_->put(key, response.raw_text, response.latency_ms);
    return response;
}

}  // namespace relex
