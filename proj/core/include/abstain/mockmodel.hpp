#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "abstain/modelclient.hpp"

namespace abstain::mockmodel {

// One scripted response rule. Rules are evaluated record-id rules first,
// then substring rules in file order, then the default entry.
struct FixtureEntry {
    enum class Match { by_record_id, by_prompt_substring, fallback };

    Match match = Match::fallback;
    std::string key;
    std::string response_text;
    // HTTP statuses to emit, one per call, before serving the success
    // body; exercises the client's retry path.
    std::vector<int> status_sequence;
};

std::vector<FixtureEntry> load_fixtures(const std::filesystem::path& path);
std::vector<FixtureEntry> fixtures_from_jsonl(const std::string& text);

struct CallStats {
    std::uint64_t total_calls = 0;
    int peak_concurrency = 0;
    std::map<std::string, std::uint64_t> per_key_counts;
};

struct MockReply {
    int status = 200;
    std::string body;
};

// Deterministic scripted responder. Thread-safe; respond() is reentrant
// and the counters are updated under a single lock.
class MockResponder {
public:
    explicit MockResponder(std::vector<FixtureEntry> fixtures);

    // (status, wire body) for one call. 404 when nothing matches and no
    // default entry exists.
    MockReply respond(const std::string& prompt,
                      const std::string& record_id);

    CallStats call_stats() const;

    // How long each call stays in flight; concurrency tests raise this so
    // overlap shows up in peak_concurrency.
    void set_simulated_latency(std::chrono::milliseconds latency);

private:
    struct Rule {
        FixtureEntry entry;
        std::size_t served = 0;  // consumed status_sequence entries
    };

    const Rule* find_rule(const std::string& prompt,
                          const std::string& record_id);

    std::vector<Rule> record_id_rules_;
    std::vector<Rule> substring_rules_;
    std::optional<Rule> default_rule_;

    mutable std::mutex mutex_;
    CallStats stats_;
    int in_flight_ = 0;
    std::chrono::milliseconds simulated_latency_{0};
};

// In-process transport over a responder; lets unit tests drive modelclient
// without sockets. Speaks exactly the wire protocol of the HTTP server.
class MockTransport : public modelclient::Transport {
public:
    explicit MockTransport(MockResponder& responder)
        : responder_(responder) {}
    modelclient::HttpResponse post(
        const modelclient::HttpRequest& request) override;

private:
    MockResponder& responder_;
};

// Loopback HTTP server exposing the responder on /chat/completions (plus
// /stats). start() binds 127.0.0.1 and returns the chosen port.
class MockServer {
public:
    explicit MockServer(MockResponder& responder);
    ~MockServer();

    int start(int port = 0);  // 0 picks a free port
    void stop();
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Extract (prompt, record id) from one wire request; shared by the
// transport and the server so both speak the same protocol.
std::pair<std::string, std::string> parse_wire_request(
    const std::string& body, const std::string& record_id_header);

}  // namespace abstain::mockmodel
