#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abstain/types.hpp"

namespace abstain::perturb {

// The four context treatments: keep the gold context, drop it, swap it for
// a random train-split context, or append a random train-split context.
enum class Mode { given, none, random, noisy };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

struct PoolEntry {
    std::string source_id;
    std::string context;
};

// Replacement contexts for random/noisy runs: the train split of the same
// dataset, nonempty contexts only, id-sorted.
struct ContextPool {
    DatasetKind dataset_kind = DatasetKind::squad2;
    std::vector<PoolEntry> entries;
};

struct PerturbedInstance {
    std::string record_id;
    Mode mode = Mode::given;
    std::string effective_context;
    std::optional<std::string> pool_source_id;
    bool has_context_prompt = true;
};

// Build the sampling pool from train records. Entries keep only nonempty
// contexts and come out sorted by id so downstream selection is
// order-independent. Throws PoolError when nothing usable remains and
// ArgumentError on mixed dataset kinds or non-train records.
ContextPool build_pool(const std::vector<QARecord>& train_records);

// Deterministic per-record selection: index = big-endian SHA-256 of
// (decimal seed, 0x1F, record_id) mod the number of eligible entries,
// where entries whose source_id equals record_id are excluded. No shared
// RNG state, so the choice is independent of iteration order.
const PoolEntry& pick_random_context(const std::string& record_id,
                                     const ContextPool& pool,
                                     std::uint64_t seed);

// Apply one treatment to one record. random/noisy require a pool.
PerturbedInstance apply(const QARecord& record, Mode mode,
                        const ContextPool* pool, std::uint64_t seed);

// JSONL round trip for perturbed-instance files.
std::string to_jsonl(const std::vector<PerturbedInstance>& instances);
std::vector<PerturbedInstance> from_jsonl(const std::string& text);

}  // namespace abstain::perturb
