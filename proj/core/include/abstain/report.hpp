#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "abstain/metrics.hpp"

namespace abstain::report {

enum class Format { markdown, csv, json };
enum class FacetSelection { overall, answerability, question_type };

Format format_from_string(const std::string& s);
FacetSelection facet_selection_from_string(const std::string& s);
std::string to_string(Format format);
std::string to_string(FacetSelection selection);

struct ReportRun {
    std::string run_id;
    metrics::RunMetrics metrics;
    // Absent for the baseline row, present for every perturbation row.
    std::optional<metrics::RunDelta> delta;
};

struct ReportSpec {
    std::string baseline_run_id;
    std::vector<std::string> comparison_run_ids;
    Format format = Format::markdown;
    FacetSelection facet_selection = FacetSelection::answerability;
    std::string dataset_label;
    std::string model_label;
};

// Baseline section with absolute values (task metric plain, abstention in
// parentheses) followed by one signed-delta section per perturbation.
// Output bytes are a pure function of the inputs.
std::string emit(const std::vector<ReportRun>& runs, const ReportSpec& spec);

// Answering-to-abstaining transition table: one row per label, rates x100
// to one decimal, best value(s) bolded in markdown.
std::string emit_transition_table(
    const std::vector<std::pair<std::string, double>>& pairs,
    Format format = Format::markdown);

// Shared rendering helpers (also used by tests).
std::string format_percent(double value);          // "89.2"
std::string format_signed(double value);           // "+25.0" / "-3.6" / "0.0"
std::string format_abstention_abs(double rate);    // "(89.2)" from [0,1]
std::string format_abstention_delta(double pct);   // "(+25.0)" / "(0.0)"

}  // namespace abstain::report
