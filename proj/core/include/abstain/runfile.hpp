#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "abstain/metrics.hpp"
#include "abstain/modelclient.hpp"
#include "abstain/types.hpp"

namespace abstain::runfile {

// One scored run: everything the report stage needs, serialized as a
// single JSON document.
struct ScoredRun {
    std::string run_id;
    DatasetKind dataset = DatasetKind::squad2;
    perturb::Mode mode = perturb::Mode::given;
    std::string model;
    metrics::RunMetrics metrics;
    std::vector<metrics::InstanceScore> instance_scores;
};

// Post-process and score a batch of responses against their records.
// Responses carrying an error marker abort scoring: metrics over partial
// runs would be silently wrong, rerunning with the cache fills the gaps.
ScoredRun score_responses(
    const std::vector<modelclient::ModelResponse>& responses,
    const std::vector<QARecord>& records, const std::string& run_id,
    const std::string& model, const std::string& abstain_token);

std::string to_json(const ScoredRun& run);
ScoredRun from_json(const std::string& text);
void save(const std::filesystem::path& path, const ScoredRun& run);
ScoredRun load(const std::filesystem::path& path);

}  // namespace abstain::runfile
