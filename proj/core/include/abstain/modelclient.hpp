#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abstain/perturb.hpp"
#include "abstain/prompts.hpp"

namespace abstain::modelclient {

struct ModelConfig {
    std::string endpoint_base_url;
    std::string model_name;
    double temperature = 0.0;     // paper decoding settings
    double top_p = 1.0;
    int max_new_tokens = 256;
    int max_parallel = 4;
    std::optional<int> requests_per_minute;
    int retry_max_attempts = 5;
    std::chrono::milliseconds retry_base_delay{1000};
};

struct ModelResponse {
    std::string record_id;
    perturb::Mode mode = perturb::Mode::given;
    std::string raw_text;
    bool cached = false;
    int attempts = 1;
    std::int64_t latency_ms = 0;
    std::string request_fingerprint;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

struct HttpRequest {
    std::string path;
    std::string body;
    // Metadata headers; record id travels here so scripted responders can
    // match on it. Real endpoints ignore it.
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    // Throws TransportError when no HTTP exchange happened at all.
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

// Blocking client for {endpoint_base_url}/chat/completions. The base URL
// may carry a path prefix ("https://api.openai.com/v1"). A nonempty API
// key is sent as a bearer token.
class HttpTransport : public Transport {
public:
    HttpTransport(std::string base_url, std::string api_key);
    ~HttpTransport() override;
    HttpResponse post(const HttpRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct CachedResponse {
    std::string raw_text;
    int attempts = 1;
    std::int64_t latency_ms = 0;
    std::string created_at;
};

// Directory of <fingerprint>.json files. Writes go through a temp file and
// an atomic rename, so concurrent readers never observe partial entries.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<CachedResponse> lookup(const std::string& fingerprint) const;
    void store(const std::string& fingerprint, const CachedResponse& response);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

// Sliding 60s window limiter on request starts. The clock and sleeper are
// injectable for tests.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;
    using NowFn = std::function<Clock::time_point()>;
    using SleepFn = std::function<void(Clock::duration)>;

    explicit RateLimiter(std::optional<int> requests_per_minute,
                         NowFn now = {}, SleepFn sleep = {});

    // Blocks until starting one more request keeps the window within the
    // limit, then records the start.
    void acquire();

private:
    std::optional<int> limit_;
    NowFn now_;
    SleepFn sleep_;
    std::mutex mutex_;
    std::vector<Clock::time_point> starts_;
};

// SHA-256 hex over the canonical request serialization: model 0x1F
// temperature 0x1F top_p 0x1F max_new_tokens 0x1F prompt, reals rendered
// as shortest round-trip decimals.
std::string fingerprint(const ModelConfig& config, const std::string& prompt);

std::string shortest_double(double value);

// Pre-jitter backoff delay for the attempt that just failed (1-based):
// retry_base_delay * 2^(attempt-1). The actual sleep applies full jitter,
// uniform in [0, delay].
std::chrono::milliseconds backoff_delay(const ModelConfig& config,
                                        int attempt);

// One completion: cache lookup, then POST with retries on 429/5xx and
// transport faults. Throws RequestError / ProtocolError / TransportError.
ModelResponse complete(const prompts::RenderedPrompt& prompt,
                       const ModelConfig& config, Transport& transport,
                       ResponseCache* cache);

// The batch driver: bounded worker pool (at most max_parallel in flight),
// shared rate limiter, output order matching input order. Per-instance
// failures come back as responses with a nonempty error field.
std::vector<ModelResponse> run_batch(
    const std::vector<perturb::PerturbedInstance>& instances,
    const std::vector<prompts::RenderedPrompt>& prompts_in,
    const ModelConfig& config, Transport& transport, ResponseCache* cache);

// JSONL round trip for response files.
std::string to_jsonl(const std::vector<ModelResponse>& responses);
std::vector<ModelResponse> from_jsonl(const std::string& text);

}  // namespace abstain::modelclient
