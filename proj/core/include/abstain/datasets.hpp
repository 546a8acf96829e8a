#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "abstain/types.hpp"

namespace abstain::datasets {

// Parse one of the four upstream schemas into canonical QARecords, in file
// order. Throws ParseError naming the offending native id and field on any
// schema violation; an empty file is an error.
std::vector<QARecord> ingest(const std::filesystem::path& path,
                             DatasetKind kind, Split split);

// Deterministic per-stratum sampling. Strata are (question_type,
// answerable); each stratum contributes ceil(fraction * stratum size)
// records, chosen by ranking the stratum on the per-record selection
// digest for `seed`. Output is sorted by id and independent of the input
// order. fraction outside (0, 1] is an ArgumentError.
std::vector<QARecord> stratified_sample(const std::vector<QARecord>& records,
                                        double fraction, std::uint64_t seed);

// Invariant check over a corpus; returns one human-readable violation per
// failed invariant, each naming the record id. Empty result means valid.
std::vector<std::string> validate(const std::vector<QARecord>& records);

// Canonical JSONL interchange: one QARecord per line, UTF-8, field names
// matching the type. Reading back what was written is identity.
std::string to_jsonl(const std::vector<QARecord>& records);
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<QARecord>& records);
std::vector<QARecord> from_jsonl(const std::string& text);
std::vector<QARecord> read_jsonl(const std::filesystem::path& path);

}  // namespace abstain::datasets
