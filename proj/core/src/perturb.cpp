#include "abstain/perturb.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "abstain/errors.hpp"
#include "abstain/hashing.hpp"

namespace abstain::perturb {

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::given: return "given";
        case Mode::none: return "none";
        case Mode::random: return "random";
        case Mode::noisy: return "noisy";
    }
    throw ArgumentError("unknown perturbation mode");
}

Mode mode_from_string(const std::string& s) {
    if (s == "given") return Mode::given;
    if (s == "none") return Mode::none;
    if (s == "random") return Mode::random;
    if (s == "noisy") return Mode::noisy;
    throw ArgumentError("unknown perturbation mode: " + s);
}

ContextPool build_pool(const std::vector<QARecord>& train_records) {
    if (train_records.empty()) {
        throw PoolError("context pool: no train records");
    }
    ContextPool pool;
    pool.dataset_kind = train_records.front().dataset_kind;
    for (const QARecord& record : train_records) {
        if (record.dataset_kind != pool.dataset_kind) {
            throw ArgumentError(
                "context pool: mixed dataset kinds (" +
                abstain::to_string(pool.dataset_kind) + " vs " +
                abstain::to_string(record.dataset_kind) + ")");
        }
        if (record.split != Split::train) {
            throw ArgumentError("context pool: record " + record.id +
                                " is not from the train split");
        }
        if (!record.context.empty()) {
            pool.entries.push_back({record.id, record.context});
        }
    }
    if (pool.entries.empty()) {
        throw PoolError("context pool: all train contexts are empty");
    }
    std::sort(pool.entries.begin(), pool.entries.end(),
              [](const PoolEntry& a, const PoolEntry& b) {
                  return a.source_id < b.source_id;
              });
    return pool;
}

const PoolEntry& pick_random_context(const std::string& record_id,
                                     const ContextPool& pool,
                                     std::uint64_t seed) {
    std::vector<const PoolEntry*> eligible;
    eligible.reserve(pool.entries.size());
    for (const PoolEntry& entry : pool.entries) {
        if (entry.source_id != record_id) {
            eligible.push_back(&entry);
        }
    }
    if (eligible.empty()) {
        throw PoolError("context pool: no entry eligible for " + record_id);
    }
    auto digest = hashing::selection_digest(seed, record_id);
    return *eligible[hashing::digest_mod(digest, eligible.size())];
}

PerturbedInstance apply(const QARecord& record, Mode mode,
                        const ContextPool* pool, std::uint64_t seed) {
    PerturbedInstance instance;
    instance.record_id = record.id;
    instance.mode = mode;
    switch (mode) {
        case Mode::given:
            instance.effective_context = record.context;
            break;
        case Mode::none:
            instance.effective_context.clear();
            instance.has_context_prompt = false;
            break;
        case Mode::random: {
            if (pool == nullptr) {
                throw ArgumentError("random mode requires a context pool");
            }
            const PoolEntry& entry =
                pick_random_context(record.id, *pool, seed);
            instance.effective_context = entry.context;
            instance.pool_source_id = entry.source_id;
            break;
        }
        case Mode::noisy: {
            if (pool == nullptr) {
                throw ArgumentError("noisy mode requires a context pool");
            }
            const PoolEntry& entry =
                pick_random_context(record.id, *pool, seed);
            // Gold context stays a strict prefix; an empty gold context
            // yields "\n" + passage, which downstream treats as meaningful
            // (noisy-on-empty is a distinct treatment, not a no-op).
            instance.effective_context =
                record.context + "\n" + entry.context;
            instance.pool_source_id = entry.source_id;
            break;
        }
    }
    return instance;
}

std::string to_jsonl(const std::vector<PerturbedInstance>& instances) {
    std::string out;
    for (const PerturbedInstance& instance : instances) {
        nlohmann::json j = {
            {"record_id", instance.record_id},
            {"mode", to_string(instance.mode)},
            {"effective_context", instance.effective_context},
            {"has_context_prompt", instance.has_context_prompt},
        };
        if (instance.pool_source_id) {
            j["pool_source_id"] = *instance.pool_source_id;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<PerturbedInstance> from_jsonl(const std::string& text) {
    std::vector<PerturbedInstance> instances;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            PerturbedInstance instance;
            instance.record_id = j.at("record_id").get<std::string>();
            instance.mode = mode_from_string(j.at("mode").get<std::string>());
            instance.effective_context =
                j.at("effective_context").get<std::string>();
            instance.has_context_prompt =
                j.at("has_context_prompt").get<bool>();
            if (j.contains("pool_source_id")) {
                instance.pool_source_id =
                    j["pool_source_id"].get<std::string>();
            }
            instances.push_back(std::move(instance));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("instances jsonl line " +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return instances;
}

}  // namespace abstain::perturb
