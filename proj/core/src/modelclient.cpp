#include "abstain/modelclient.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "abstain/errors.hpp"
#include "abstain/hashing.hpp"

namespace abstain::modelclient {

namespace {

constexpr std::chrono::seconds kWindow{60};

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

std::string wire_body(const ModelConfig& config, const std::string& prompt) {
    nlohmann::json body = {
        {"model", config.model_name},
        {"messages",
         nlohmann::json::array(
             {{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config.temperature},
        {"top_p", config.top_p},
        {"max_tokens", config.max_new_tokens},
    };
    return body.dump();
}

std::string extract_content(const std::string& body) {
    try {
        nlohmann::json j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content")
            .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed completion body: ") +
                            e.what());
    }
}

std::chrono::milliseconds jittered(std::chrono::milliseconds delay,
                                   std::mt19937_64& rng) {
    if (delay.count() <= 0) return std::chrono::milliseconds{0};
    std::uniform_int_distribution<std::int64_t> dist(0, delay.count());
    return std::chrono::milliseconds{dist(rng)};
}

}  // namespace

// --- HttpTransport ---------------------------------------------------------

struct HttpTransport::Impl {
    std::string scheme_host_port;
    std::string path_prefix;
    std::string api_key;
};

HttpTransport::HttpTransport(std::string base_url, std::string api_key)
    : impl_(std::make_unique<Impl>()) {
    // Split "scheme://host[:port]/prefix" so the client gets the origin and
    // the request gets the prefixed path.
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ArgumentError("endpoint URL must include a scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        impl_->scheme_host_port = base_url;
    } else {
        impl_->scheme_host_port = base_url.substr(0, path_start);
        std::string prefix = base_url.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        impl_->path_prefix = prefix;
    }
    impl_->api_key = std::move(api_key);
}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::post(const HttpRequest& request) {
    httplib::Client client(impl_->scheme_host_port);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + impl_->api_key);
    }
    for (const auto& [name, value] : request.headers) {
        headers.emplace(name, value);
    }
    auto result = client.Post(impl_->path_prefix + request.path, headers,
                              request.body, "application/json");
    if (!result) {
        throw TransportError("POST " + impl_->scheme_host_port +
                             impl_->path_prefix + request.path + " failed: " +
                             httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

// --- ResponseCache ----------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir)
    : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<CachedResponse> ResponseCache::lookup(
    const std::string& fingerprint) const {
    std::filesystem::path path = dir_ / (fingerprint + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        nlohmann::json j = nlohmann::json::parse(buf.str());
        CachedResponse cached;
        cached.raw_text = j.at("raw_text").get<std::string>();
        cached.attempts = j.at("attempts").get<int>();
        cached.latency_ms = j.at("latency_ms").get<std::int64_t>();
        cached.created_at = j.value("created_at", "");
        return cached;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("corrupt cache entry " + path.string() + ": " +
                         e.what());
    }
}

void ResponseCache::store(const std::string& fingerprint,
                          const CachedResponse& response) {
    nlohmann::json j = {
        {"raw_text", response.raw_text},
        {"attempts", response.attempts},
        {"latency_ms", response.latency_ms},
        {"created_at", response.created_at},
    };
    std::filesystem::path final_path = dir_ / (fingerprint + ".json");
    // Unique temp name per writer; rename makes the entry visible at once.
    std::ostringstream tmp_name;
    tmp_name << fingerprint << ".tmp." << std::this_thread::get_id();
    std::filesystem::path tmp_path = dir_ / tmp_name.str();
    {
        std::ofstream out(tmp_path, std::ios::binary);
        if (!out) {
            throw TransportError("cannot write cache entry " +
                                 tmp_path.string());
        }
        out << j.dump() << '\n';
    }
    std::filesystem::rename(tmp_path, final_path);
}

// --- RateLimiter ------------------------------------------------------------

RateLimiter::RateLimiter(std::optional<int> requests_per_minute, NowFn now,
                         SleepFn sleep)
    : limit_(requests_per_minute),
      now_(now ? std::move(now) : [] { return Clock::now(); }),
      sleep_(sleep ? std::move(sleep)
                   : [](Clock::duration d) { std::this_thread::sleep_for(d); }) {
    if (limit_ && *limit_ < 1) {
        throw ArgumentError("requests_per_minute must be >= 1");
    }
}

void RateLimiter::acquire() {
    if (!limit_) return;
    while (true) {
        Clock::duration wait{};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            Clock::time_point now = now_();
            std::erase_if(starts_, [&](Clock::time_point start) {
                return now - start >= kWindow;
            });
            if (starts_.size() < static_cast<std::size_t>(*limit_)) {
                starts_.push_back(now);
                return;
            }
            Clock::time_point oldest =
                *std::min_element(starts_.begin(), starts_.end());
            wait = oldest + kWindow - now;
        }
        sleep_(std::max(wait, Clock::duration{std::chrono::milliseconds{1}}));
    }
}

// --- request fingerprint ----------------------------------------------------

std::string shortest_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw ArgumentError("cannot render real value");
    }
    return std::string(buf, ptr);
}

std::string fingerprint(const ModelConfig& config, const std::string& prompt) {
    std::string key;
    key.reserve(prompt.size() + 64);
    key += config.model_name;
    key.push_back('\x1f');
    key += shortest_double(config.temperature);
    key.push_back('\x1f');
    key += shortest_double(config.top_p);
    key.push_back('\x1f');
    key += std::to_string(config.max_new_tokens);
    key.push_back('\x1f');
    key += prompt;
    return hashing::sha256_hex(key);
}

std::chrono::milliseconds backoff_delay(const ModelConfig& config,
                                        int attempt) {
    auto delay = config.retry_base_delay;
    for (int i = 1; i < attempt; ++i) {
        delay *= 2;
    }
    return delay;
}

// --- complete / run_batch ---------------------------------------------------

ModelResponse complete(const prompts::RenderedPrompt& prompt,
                       const ModelConfig& config, Transport& transport,
                       ResponseCache* cache) {
    ModelResponse response;
    response.record_id = prompt.record_id;
    response.request_fingerprint = fingerprint(config, prompt.text);

    if (cache != nullptr) {
        if (auto hit = cache->lookup(response.request_fingerprint)) {
            response.raw_text = hit->raw_text;
            response.cached = true;
            response.attempts = hit->attempts;
            response.latency_ms = hit->latency_ms;
            return response;
        }
    }

    HttpRequest request;
    request.path = "/chat/completions";
    request.body = wire_body(config, prompt.text);
    request.headers.emplace_back("X-Record-Id", prompt.record_id);

    std::mt19937_64 rng(std::random_device{}());
    auto started = std::chrono::steady_clock::now();
    int attempt = 0;
    while (true) {
        ++attempt;
        std::optional<HttpResponse> http;
        std::string transport_failure;
        try {
            http = transport.post(request);
        } catch (const TransportError& e) {
            transport_failure = e.what();
        }
        if (http && !retryable_status(http->status)) {
            if (http->status < 200 || http->status >= 300) {
                throw RequestError("endpoint returned " +
                                   std::to_string(http->status) + " for " +
                                   prompt.record_id + ": " + http->body);
            }
            response.raw_text = extract_content(http->body);
            response.attempts = attempt;
            response.latency_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
            if (cache != nullptr) {
                cache->store(response.request_fingerprint,
                             {response.raw_text, response.attempts,
                              response.latency_ms, iso8601_utc_now()});
            }
            return response;
        }
        if (attempt >= config.retry_max_attempts) {
            if (!transport_failure.empty()) {
                throw TransportError(transport_failure + " (after " +
                                     std::to_string(attempt) + " attempts)");
            }
            throw TransportError("endpoint still returning " +
                                 std::to_string(http->status) + " after " +
                                 std::to_string(attempt) + " attempts for " +
                                 prompt.record_id);
        }
        std::this_thread::sleep_for(
            jittered(backoff_delay(config, attempt), rng));
    }
}

std::vector<ModelResponse> run_batch(
    const std::vector<perturb::PerturbedInstance>& instances,
    const std::vector<prompts::RenderedPrompt>& prompts_in,
    const ModelConfig& config, Transport& transport, ResponseCache* cache) {
    if (instances.size() != prompts_in.size()) {
        throw ArgumentError("run_batch: instances and prompts differ in size");
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (instances[i].record_id != prompts_in[i].record_id) {
            throw ArgumentError("run_batch: prompt " + std::to_string(i) +
                                " is not aligned with its instance");
        }
    }
    std::vector<ModelResponse> responses(instances.size());
    if (instances.empty()) return responses;

    RateLimiter limiter(config.requests_per_minute);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= instances.size()) break;
            limiter.acquire();
            try {
                responses[i] = complete(prompts_in[i], config, transport,
                                        cache);
            } catch (const std::exception& e) {
                responses[i] = ModelResponse{};
                responses[i].record_id = instances[i].record_id;
                responses[i].request_fingerprint =
                    fingerprint(config, prompts_in[i].text);
                responses[i].error = e.what();
            }
            responses[i].mode = instances[i].mode;
        }
    };

    std::size_t n_workers = std::min<std::size_t>(
        std::max(1, config.max_parallel), instances.size());
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
    for (std::thread& thread : workers) thread.join();
    return responses;
}

std::string to_jsonl(const std::vector<ModelResponse>& responses) {
    std::string out;
    for (const ModelResponse& response : responses) {
        nlohmann::json j = {
            {"record_id", response.record_id},
            {"mode", perturb::to_string(response.mode)},
            {"raw_text", response.raw_text},
            {"cached", response.cached},
            {"attempts", response.attempts},
            {"latency_ms", response.latency_ms},
            {"request_fingerprint", response.request_fingerprint},
        };
        if (!response.error.empty()) {
            j["error"] = response.error;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<ModelResponse> from_jsonl(const std::string& text) {
    std::vector<ModelResponse> responses;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            ModelResponse response;
            response.record_id = j.at("record_id").get<std::string>();
            response.mode =
                perturb::mode_from_string(j.at("mode").get<std::string>());
            response.raw_text = j.at("raw_text").get<std::string>();
            response.cached = j.at("cached").get<bool>();
            response.attempts = j.at("attempts").get<int>();
            response.latency_ms = j.at("latency_ms").get<std::int64_t>();
            response.request_fingerprint =
                j.at("request_fingerprint").get<std::string>();
            response.error = j.value("error", "");
            responses.push_back(std::move(response));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("responses jsonl line " +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return responses;
}

}  // namespace abstain::modelclient
