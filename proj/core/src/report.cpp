#include "abstain/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "abstain/errors.hpp"

namespace abstain::report {

namespace {

// Fixed row orders; facets absent from a run are skipped.
const std::vector<std::string> kAnswerabilityOrder = {"answerable",
                                                      "unanswerable"};
const std::vector<std::string> kQuestionTypeOrder = {
    "extractive", "abstractive", "boolean", "unanswerable"};

std::string one_decimal(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", value);
    std::string s = buf;
    if (s == "-0.0") s = "0.0";
    return s;
}

struct FacetRow {
    std::string facet;
    std::size_t n = 0;
    double task_metric = 0.0;
    double abstention_rate = 0.0;
};

struct DeltaRow {
    std::string facet;
    double task_metric = 0.0;
    double abstention_pct = 0.0;
};

std::vector<FacetRow> baseline_rows(const metrics::RunMetrics& m,
                                    FacetSelection selection) {
    std::vector<FacetRow> rows;
    auto add_from = [&](const std::map<std::string, metrics::FacetMetrics>&
                            facets,
                        const std::vector<std::string>& order) {
        for (const std::string& key : order) {
            auto it = facets.find(key);
            if (it == facets.end()) continue;
            rows.push_back({key, it->second.n, it->second.task_metric,
                            it->second.abstention_rate});
        }
    };
    if (selection == FacetSelection::answerability) {
        add_from(m.answerability_facets, kAnswerabilityOrder);
    } else if (selection == FacetSelection::question_type) {
        add_from(m.question_type_facets, kQuestionTypeOrder);
    }
    rows.push_back({"overall", m.n, m.task_metric, m.abstention_rate});
    return rows;
}

std::vector<DeltaRow> delta_rows(const metrics::RunDelta& d,
                                 FacetSelection selection) {
    std::vector<DeltaRow> rows;
    auto add_from = [&](const std::map<std::string, metrics::FacetDelta>&
                            facets,
                        const std::vector<std::string>& order) {
        for (const std::string& key : order) {
            auto it = facets.find(key);
            if (it == facets.end()) continue;
            rows.push_back({key, it->second.task_metric,
                            it->second.abstention_rate_pct});
        }
    };
    if (selection == FacetSelection::answerability) {
        add_from(d.answerability_facets, kAnswerabilityOrder);
    } else if (selection == FacetSelection::question_type) {
        add_from(d.question_type_facets, kQuestionTypeOrder);
    }
    rows.push_back({"overall", d.overall.task_metric,
                    d.overall.abstention_rate_pct});
    return rows;
}

const ReportRun& find_run(const std::vector<ReportRun>& runs,
                          const std::string& run_id) {
    for (const ReportRun& run : runs) {
        if (run.run_id == run_id) return run;
    }
    throw ArgumentError("report: run '" + run_id + "' not provided");
}

std::string emit_markdown(const ReportRun& baseline,
                          const std::vector<const ReportRun*>& comparisons,
                          const ReportSpec& spec) {
    std::string out = "# Abstention report";
    if (!spec.dataset_label.empty()) out += " - " + spec.dataset_label;
    if (!spec.model_label.empty()) out += " (" + spec.model_label + ")";
    out += "\n\nTask metric shown plain, abstention rates and deltas in "
           "parentheses.\n";

    out += "\n## Baseline: " + perturb::to_string(baseline.metrics.mode) +
           " [" + baseline.run_id + "]\n\n";
    out += "| facet | n | task | abstention |\n";
    out += "| --- | ---: | ---: | ---: |\n";
    for (const FacetRow& row :
         baseline_rows(baseline.metrics, spec.facet_selection)) {
        out += "| " + row.facet + " | " + std::to_string(row.n) + " | " +
               format_percent(row.task_metric) + " | " +
               format_abstention_abs(row.abstention_rate) + " |\n";
    }

    for (const ReportRun* run : comparisons) {
        out += "\n## Delta: " + perturb::to_string(run->metrics.mode) + " [" +
               run->run_id + "]\n\n";
        out += "| facet | task | abstention |\n";
        out += "| --- | ---: | ---: |\n";
        for (const DeltaRow& row :
             delta_rows(*run->delta, spec.facet_selection)) {
            out += "| " + row.facet + " | " + format_signed(row.task_metric) +
                   " | " + format_abstention_delta(row.abstention_pct) +
                   " |\n";
        }
    }
    return out;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string emit_csv(const ReportRun& baseline,
                     const std::vector<const ReportRun*>& comparisons,
                     const ReportSpec& spec) {
    std::string out = "section,run_id,mode,facet,n,task,abstention\n";
    for (const FacetRow& row :
         baseline_rows(baseline.metrics, spec.facet_selection)) {
        out += "baseline," + csv_escape(baseline.run_id) + "," +
               perturb::to_string(baseline.metrics.mode) + "," + row.facet +
               "," + std::to_string(row.n) + "," +
               format_percent(row.task_metric) + "," +
               format_percent(row.abstention_rate * 100.0) + "\n";
    }
    for (const ReportRun* run : comparisons) {
        for (const DeltaRow& row :
             delta_rows(*run->delta, spec.facet_selection)) {
            out += "delta," + csv_escape(run->run_id) + "," +
                   perturb::to_string(run->metrics.mode) + "," + row.facet +
                   ",," + format_signed(row.task_metric) + "," +
                   format_signed(row.abstention_pct) + "\n";
        }
    }
    return out;
}

double rounded(const std::string& formatted) { return std::stod(formatted); }

std::string emit_json(const ReportRun& baseline,
                      const std::vector<const ReportRun*>& comparisons,
                      const ReportSpec& spec) {
    nlohmann::json j;
    j["dataset"] = spec.dataset_label;
    j["model"] = spec.model_label;
    j["facet_selection"] = to_string(spec.facet_selection);
    nlohmann::json base;
    base["run_id"] = baseline.run_id;
    base["mode"] = perturb::to_string(baseline.metrics.mode);
    base["rows"] = nlohmann::json::array();
    for (const FacetRow& row :
         baseline_rows(baseline.metrics, spec.facet_selection)) {
        base["rows"].push_back(
            {{"facet", row.facet},
             {"n", row.n},
             {"task", rounded(format_percent(row.task_metric))},
             {"abstention",
              rounded(format_percent(row.abstention_rate * 100.0))}});
    }
    j["baseline"] = std::move(base);
    j["comparisons"] = nlohmann::json::array();
    for (const ReportRun* run : comparisons) {
        nlohmann::json section;
        section["run_id"] = run->run_id;
        section["mode"] = perturb::to_string(run->metrics.mode);
        section["rows"] = nlohmann::json::array();
        for (const DeltaRow& row :
             delta_rows(*run->delta, spec.facet_selection)) {
            section["rows"].push_back(
                {{"facet", row.facet},
                 {"task_delta", rounded(format_signed(row.task_metric))},
                 {"abstention_delta",
                  rounded(format_signed(row.abstention_pct))}});
        }
        j["comparisons"].push_back(std::move(section));
    }
    return j.dump(1) + "\n";
}

}  // namespace

Format format_from_string(const std::string& s) {
    if (s == "markdown") return Format::markdown;
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ArgumentError("unknown report format: " + s);
}

FacetSelection facet_selection_from_string(const std::string& s) {
    if (s == "overall") return FacetSelection::overall;
    if (s == "answerability") return FacetSelection::answerability;
    if (s == "question_type") return FacetSelection::question_type;
    throw ArgumentError("unknown facet selection: " + s);
}

std::string to_string(Format format) {
    switch (format) {
        case Format::markdown: return "markdown";
        case Format::csv: return "csv";
        case Format::json: return "json";
    }
    throw ArgumentError("unknown report format");
}

std::string to_string(FacetSelection selection) {
    switch (selection) {
        case FacetSelection::overall: return "overall";
        case FacetSelection::answerability: return "answerability";
        case FacetSelection::question_type: return "question_type";
    }
    throw ArgumentError("unknown facet selection");
}

std::string format_percent(double value) { return one_decimal(value); }

std::string format_signed(double value) {
    std::string s = one_decimal(value);
    if (s != "0.0" && value > 0.0) s = "+" + s;
    return s;
}

std::string format_abstention_abs(double rate) {
    return "(" + format_percent(rate * 100.0) + ")";
}

std::string format_abstention_delta(double pct) {
    return "(" + format_signed(pct) + ")";
}

std::string emit(const std::vector<ReportRun>& runs, const ReportSpec& spec) {
    if (runs.empty()) {
        throw ArgumentError("report: no runs");
    }
    const ReportRun& baseline = find_run(runs, spec.baseline_run_id);
    if (baseline.delta.has_value()) {
        throw ArgumentError("report: baseline run must not carry deltas");
    }
    std::vector<const ReportRun*> comparisons;
    for (const std::string& run_id : spec.comparison_run_ids) {
        const ReportRun& run = find_run(runs, run_id);
        if (!run.delta.has_value()) {
            throw ArgumentError("report: run '" + run_id +
                                "' is missing deltas against the baseline");
        }
        comparisons.push_back(&run);
    }
    switch (spec.format) {
        case Format::markdown: return emit_markdown(baseline, comparisons, spec);
        case Format::csv: return emit_csv(baseline, comparisons, spec);
        case Format::json: return emit_json(baseline, comparisons, spec);
    }
    throw ArgumentError("unknown report format");
}

std::string emit_transition_table(
    const std::vector<std::pair<std::string, double>>& pairs, Format format) {
    if (pairs.empty()) {
        throw ArgumentError("transition table: no entries");
    }
    // Compare at display precision so ties render consistently.
    std::string best;
    for (const auto& [label, rate] : pairs) {
        (void)label;
        std::string formatted = format_percent(rate * 100.0);
        if (best.empty() || rounded(formatted) > rounded(best)) {
            best = formatted;
        }
    }
    if (format == Format::csv) {
        std::string out = "label,answered_to_abstained\n";
        for (const auto& [label, rate] : pairs) {
            out += csv_escape(label) + "," + format_percent(rate * 100.0) +
                   "\n";
        }
        return out;
    }
    if (format == Format::json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& [label, rate] : pairs) {
            j.push_back({{"label", label},
                         {"answered_to_abstained",
                          rounded(format_percent(rate * 100.0))}});
        }
        return j.dump(1) + "\n";
    }
    std::string out =
        "| label | answered -> abstained (%) |\n| --- | ---: |\n";
    for (const auto& [label, rate] : pairs) {
        std::string formatted = format_percent(rate * 100.0);
        bool is_best = rounded(formatted) == rounded(best);
        out += "| " + label + " | " +
               (is_best ? "**" + formatted + "**" : formatted) + " |\n";
    }
    return out;
}

}  // namespace abstain::report
