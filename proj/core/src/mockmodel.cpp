#include "abstain/mockmodel.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "abstain/errors.hpp"

namespace abstain::mockmodel {

namespace {

FixtureEntry::Match match_from_string(const std::string& s) {
    if (s == "by_record_id") return FixtureEntry::Match::by_record_id;
    if (s == "by_prompt_substring") {
        return FixtureEntry::Match::by_prompt_substring;
    }
    if (s == "default") return FixtureEntry::Match::fallback;
    throw ParseError("unknown fixture match kind: " + s);
}

std::string completion_body(const std::string& content) {
    nlohmann::json j = {
        {"id", "mock-completion"},
        {"object", "chat.completion"},
        {"choices",
         nlohmann::json::array(
             {{{"index", 0},
               {"message", {{"role", "assistant"}, {"content", content}}},
               {"finish_reason", "stop"}}})},
    };
    return j.dump();
}

std::string error_body(int status) {
    nlohmann::json j = {
        {"error",
         {{"message", "scripted status " + std::to_string(status)}}}};
    return j.dump();
}

}  // namespace

std::vector<FixtureEntry> fixtures_from_jsonl(const std::string& text) {
    std::vector<FixtureEntry> fixtures;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_default = false;
    std::vector<std::string> record_keys;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            FixtureEntry entry;
            entry.match = match_from_string(j.at("match").get<std::string>());
            entry.key = j.value("key", "");
            entry.response_text = j.at("response_text").get<std::string>();
            for (const nlohmann::json& status :
                 j.value("status_sequence", nlohmann::json::array())) {
                entry.status_sequence.push_back(status.get<int>());
            }
            if (entry.match == FixtureEntry::Match::fallback) {
                if (have_default) {
                    throw ParseError("fixtures: more than one default entry");
                }
                have_default = true;
            }
            if (entry.match == FixtureEntry::Match::by_record_id) {
                for (const std::string& key : record_keys) {
                    if (key == entry.key) {
                        throw ParseError("fixtures: duplicate record id key " +
                                         entry.key);
                    }
                }
                record_keys.push_back(entry.key);
            }
            fixtures.push_back(std::move(entry));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("fixtures jsonl line " + std::to_string(line_no) +
                             ": " + e.what());
        }
    }
    return fixtures;
}

std::vector<FixtureEntry> load_fixtures(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open fixtures file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return fixtures_from_jsonl(buf.str());
}

MockResponder::MockResponder(std::vector<FixtureEntry> fixtures) {
    for (FixtureEntry& entry : fixtures) {
        switch (entry.match) {
            case FixtureEntry::Match::by_record_id:
                record_id_rules_.push_back({std::move(entry), 0});
                break;
            case FixtureEntry::Match::by_prompt_substring:
                substring_rules_.push_back({std::move(entry), 0});
                break;
            case FixtureEntry::Match::fallback:
                default_rule_ = Rule{std::move(entry), 0};
                break;
        }
    }
}

const MockResponder::Rule* MockResponder::find_rule(
    const std::string& prompt, const std::string& record_id) {
    for (Rule& rule : record_id_rules_) {
        if (rule.entry.key == record_id) return &rule;
    }
    for (Rule& rule : substring_rules_) {
        if (prompt.find(rule.entry.key) != std::string::npos) return &rule;
    }
    if (default_rule_) return &*default_rule_;
    return nullptr;
}

MockReply MockResponder::respond(const std::string& prompt,
                                 const std::string& record_id) {
    MockReply reply;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++stats_.total_calls;
        ++in_flight_;
        stats_.peak_concurrency = std::max(stats_.peak_concurrency,
                                           in_flight_);
        Rule* rule = const_cast<Rule*>(find_rule(prompt, record_id));
        std::string counted_key;
        if (rule == nullptr) {
            reply.status = 404;
            reply.body = error_body(404);
            counted_key = "(unmatched)";
        } else {
            counted_key = rule->entry.match == FixtureEntry::Match::fallback
                              ? "default"
                              : rule->entry.key;
            if (rule->served < rule->entry.status_sequence.size()) {
                int status = rule->entry.status_sequence[rule->served++];
                reply.status = status;
                reply.body = error_body(status);
            } else {
                reply.status = 200;
                reply.body = completion_body(rule->entry.response_text);
            }
        }
        ++stats_.per_key_counts[counted_key];
    }
    // Hold the call open outside the lock so overlapping callers are
    // visible in peak_concurrency.
    if (simulated_latency_.count() > 0) {
        std::this_thread::sleep_for(simulated_latency_);
    }
    {
        std::lock_guard<std::mutex> lock(mutex_);
        --in_flight_;
    }
    return reply;
}

void MockResponder::set_simulated_latency(std::chrono::milliseconds latency) {
    std::lock_guard<std::mutex> lock(mutex_);
    simulated_latency_ = latency;
}

CallStats MockResponder::call_stats() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return stats_;
}

std::pair<std::string, std::string> parse_wire_request(
    const std::string& body, const std::string& record_id_header) {
    try {
        nlohmann::json j = nlohmann::json::parse(body);
        std::string prompt = j.at("messages").at(0).at("content")
            .get<std::string>();
        return {std::move(prompt), record_id_header};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed chat completion request: ") +
                         e.what());
    }
}

modelclient::HttpResponse MockTransport::post(
    const modelclient::HttpRequest& request) {
    std::string record_id;
    for (const auto& [name, value] : request.headers) {
        if (name == "X-Record-Id") record_id = value;
    }
    auto [prompt, id] = parse_wire_request(request.body, record_id);
    MockReply reply = responder_.respond(prompt, id);
    return {reply.status, reply.body};
}

struct MockServer::Impl {
    MockResponder& responder;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit Impl(MockResponder& r) : responder(r) {}
};

MockServer::MockServer(MockResponder& responder)
    : impl_(std::make_unique<Impl>(responder)) {
    impl_->server.Post("/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
        try {
            auto [prompt, record_id] = parse_wire_request(
                req.body, req.get_header_value("X-Record-Id"));
            MockReply reply = impl_->responder.respond(prompt, record_id);
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(
                nlohmann::json{{"error", {{"message", e.what()}}}}.dump(),
                "application/json");
        }
    });
    impl_->server.Get("/stats", [this](const httplib::Request&,
                                       httplib::Response& res) {
        CallStats stats = impl_->responder.call_stats();
        nlohmann::json j = {
            {"total_calls", stats.total_calls},
            {"peak_concurrency", stats.peak_concurrency},
            {"per_key_counts", stats.per_key_counts},
        };
        res.set_content(j.dump(), "application/json");
    });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) {
            throw TransportError("cannot bind mock server to port " +
                                 std::to_string(port));
        }
        impl_->port = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void MockServer::stop() {
    if (impl_->thread.joinable()) {
        impl_->server.stop();
        impl_->thread.join();
    }
}

std::string MockServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace abstain::mockmodel
