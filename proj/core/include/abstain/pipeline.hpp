#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "abstain/modelclient.hpp"
#include "abstain/perturb.hpp"
#include "abstain/prompts.hpp"
#include "abstain/report.hpp"
#include "abstain/types.hpp"

namespace abstain::pipeline {

struct DatasetSpec {
    DatasetKind kind = DatasetKind::squad2;
    std::filesystem::path test_path;
    std::optional<std::filesystem::path> train_path;
    double sample_fraction = 1.0;
    std::uint64_t seed = 0;
};

// One matrix configuration: dataset, perturbations, prompt wording, model
// endpoint. The given-context baseline is always present (deltas need it).
struct RunSpec {
    DatasetSpec dataset;
    std::vector<perturb::Mode> perturbations;
    prompts::Style style = prompts::Style::constrained;
    std::string abstain_token = "Unanswerable";
    std::size_t max_context_words = prompts::kDefaultMaxContextWords;
    modelclient::ModelConfig model;
    std::string api_key;  // fallback when ABSTAIN_PROBE_API_KEY is unset
    std::optional<std::filesystem::path> cache_dir;
    std::filesystem::path output_dir;
    report::FacetSelection facet_selection =
        report::FacetSelection::answerability;
};

RunSpec runspec_from_json(const std::string& text);
RunSpec load_runspec(const std::filesystem::path& path);
std::string runspec_fingerprint(const RunSpec& spec);

// Render the prompt for every instance, aligned 1:1.
std::vector<prompts::RenderedPrompt> render_prompts(
    const std::vector<perturb::PerturbedInstance>& instances,
    const std::vector<QARecord>& records, prompts::Style style,
    const std::string& abstain_token, std::size_t max_context_words);

struct MatrixResult {
    std::vector<std::filesystem::path> outputs;
    std::map<std::string, bool> stage_skipped;
};

// Execute ingest -> sample -> (per mode: perturb -> render -> run -> score)
// -> report, staging every intermediate file under output_dir and keeping
// a manifest of stage input fingerprints. With resume=true, stages whose
// outputs exist and whose input fingerprints match are skipped. A stage
// failure propagates after completed stages are flushed.
MatrixResult run_matrix(const RunSpec& spec, bool resume,
                        modelclient::Transport* transport_override = nullptr,
                        std::ostream* log = nullptr);

}  // namespace abstain::pipeline
