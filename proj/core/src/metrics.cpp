#include "abstain/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "abstain/errors.hpp"

namespace abstain::metrics {

namespace {

using postprocess::Label;

std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

// Best F1 of the (already label-resolved) prediction string against the
// record's references, normalized on both sides.
double best_reference_f1(const std::string& prediction_text,
                         const QARecord& record) {
    std::string pred = postprocess::normalize_for_f1(prediction_text);
    double best = 0.0;
    for (const ReferenceAnswer& ref : record.references) {
        best = std::max(
            best, token_f1(pred, postprocess::normalize_for_f1(ref.text)));
    }
    return best;
}

double f1_dataset_score(const postprocess::NormalizedAnswer& answer,
                        const QARecord& record) {
    if (!record.answerable) {
        // SQuAD-v2 no-answer convention: only an abstention scores.
        return answer.label == Label::Unanswerable ? 1.0 : 0.0;
    }
    switch (answer.label) {
        case Label::Unanswerable:
        case Label::Unparseable:
            return 0.0;
        case Label::Yes:
            return best_reference_f1("yes", record);
        case Label::No:
            return best_reference_f1("no", record);
        case Label::Freeform:
            return best_reference_f1(answer.text, record);
    }
    return 0.0;
}

ReferenceAnswer::Kind gold_kind(const QARecord& record) {
    return record.references.front().kind;
}

double boolean_accuracy_score(const postprocess::NormalizedAnswer& answer,
                              const QARecord& record,
                              bool maybe_is_unanswerable) {
    ReferenceAnswer::Kind gold = gold_kind(record);
    if (gold == ReferenceAnswer::Kind::yes) {
        return answer.label == Label::Yes ? 1.0 : 0.0;
    }
    if (gold == ReferenceAnswer::Kind::no) {
        return answer.label == Label::No ? 1.0 : 0.0;
    }
    if (maybe_is_unanswerable &&
        gold == ReferenceAnswer::Kind::unanswerable) {
        return answer.label == Label::Unanswerable ? 1.0 : 0.0;
    }
    return 0.0;
}

FacetMetrics facet_from(const std::vector<const InstanceScore*>& scores) {
    FacetMetrics facet;
    facet.n = scores.size();
    if (scores.empty()) return facet;
    double task_sum = 0.0;
    std::size_t abstained = 0;
    for (const InstanceScore* score : scores) {
        task_sum += score->task_score;
        if (score->abstained) ++abstained;
    }
    facet.task_metric = 100.0 * task_sum / static_cast<double>(facet.n);
    facet.abstention_rate =
        static_cast<double>(abstained) / static_cast<double>(facet.n);
    return facet;
}

std::map<std::string, FacetDelta> facet_deltas(
    const std::map<std::string, FacetMetrics>& run,
    const std::map<std::string, FacetMetrics>& baseline) {
    std::map<std::string, FacetDelta> deltas;
    for (const auto& [key, run_facet] : run) {
        auto it = baseline.find(key);
        if (it == baseline.end()) {
            throw ArgumentError("facet '" + key + "' missing from baseline");
        }
        deltas[key] = {
            run_facet.task_metric - it->second.task_metric,
            (run_facet.abstention_rate - it->second.abstention_rate) * 100.0,
        };
    }
    for (const auto& [key, facet] : baseline) {
        (void)facet;
        if (run.find(key) == run.end()) {
            throw ArgumentError("facet '" + key + "' missing from run");
        }
    }
    return deltas;
}

}  // namespace

double token_f1(const std::string& prediction, const std::string& reference) {
    std::vector<std::string> pred_tokens = split_tokens(prediction);
    std::vector<std::string> ref_tokens = split_tokens(reference);
    if (pred_tokens.empty() || ref_tokens.empty()) {
        return pred_tokens == ref_tokens ? 1.0 : 0.0;
    }
    std::unordered_map<std::string, int> counts;
    for (const std::string& token : ref_tokens) ++counts[token];
    std::size_t overlap = 0;
    for (const std::string& token : pred_tokens) {
        auto it = counts.find(token);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    double precision =
        static_cast<double>(overlap) / static_cast<double>(pred_tokens.size());
    double recall =
        static_cast<double>(overlap) / static_cast<double>(ref_tokens.size());
    return 2.0 * precision * recall / (precision + recall);
}

InstanceScore score_instance(const postprocess::NormalizedAnswer& answer,
                             const QARecord& record, perturb::Mode mode) {
    bool boolean_label = answer.label == Label::Yes ||
                         answer.label == Label::No ||
                         answer.label == Label::Unparseable;
    if (record.question_type == QuestionType::boolean) {
        if (answer.label == Label::Freeform) {
            throw ArgumentError(record.id +
                                ": Freeform label on a boolean question");
        }
    } else if (boolean_label) {
        throw ArgumentError(record.id + ": boolean label '" +
                            postprocess::to_string(answer.label) +
                            "' on a non-boolean question");
    }

    InstanceScore score;
    score.record_id = record.id;
    score.mode = mode;
    score.label = answer.label;
    score.abstained = answer.label == Label::Unanswerable;
    switch (record.dataset_kind) {
        case DatasetKind::squad2:
        case DatasetKind::qasper:
            score.task_score = f1_dataset_score(answer, record);
            break;
        case DatasetKind::pubmedqa:
            score.task_score = boolean_accuracy_score(answer, record, true);
            break;
        case DatasetKind::bioasq:
            score.task_score = boolean_accuracy_score(answer, record, false);
            break;
    }
    return score;
}

RunMetrics aggregate(const std::vector<InstanceScore>& scores,
                     const std::vector<QARecord>& records) {
    if (scores.empty()) {
        throw ArgumentError("aggregate: no instance scores");
    }
    std::unordered_map<std::string, const QARecord*> by_id;
    for (const QARecord& record : records) by_id[record.id] = &record;

    RunMetrics metrics;
    metrics.mode = scores.front().mode;
    std::map<std::string, std::vector<const InstanceScore*>> answerability;
    std::map<std::string, std::vector<const InstanceScore*>> question_type;
    std::vector<const InstanceScore*> all;
    for (const InstanceScore& score : scores) {
        if (score.mode != metrics.mode) {
            throw ArgumentError("aggregate: scores span more than one mode");
        }
        auto it = by_id.find(score.record_id);
        if (it == by_id.end()) {
            throw ArgumentError("aggregate: no record for " + score.record_id);
        }
        const QARecord& record = *it->second;
        all.push_back(&score);
        answerability[record.answerable ? "answerable" : "unanswerable"]
            .push_back(&score);
        // Unanswerable questions form their own facet; the type facets
        // cover answerable questions only.
        question_type[record.answerable ? to_string(record.question_type)
                                        : "unanswerable"]
            .push_back(&score);
    }

    FacetMetrics overall = facet_from(all);
    metrics.n = overall.n;
    metrics.task_metric = overall.task_metric;
    metrics.abstention_rate = overall.abstention_rate;
    for (const auto& [key, group] : answerability) {
        metrics.answerability_facets[key] = facet_from(group);
    }
    for (const auto& [key, group] : question_type) {
        metrics.question_type_facets[key] = facet_from(group);
    }
    return metrics;
}

RunDelta delta(const RunMetrics& run, const RunMetrics& baseline) {
    if (run.n != baseline.n) {
        throw ArgumentError("delta: runs cover different record counts (" +
                            std::to_string(run.n) + " vs " +
                            std::to_string(baseline.n) + ")");
    }
    RunDelta d;
    d.mode = run.mode;
    d.overall = {
        run.task_metric - baseline.task_metric,
        (run.abstention_rate - baseline.abstention_rate) * 100.0,
    };
    d.answerability_facets =
        facet_deltas(run.answerability_facets, baseline.answerability_facets);
    d.question_type_facets =
        facet_deltas(run.question_type_facets, baseline.question_type_facets);
    return d;
}

double transition_rate(const std::vector<InstanceScore>& baseline_scores,
                       const std::vector<InstanceScore>& perturbed_scores,
                       const std::vector<QARecord>& records) {
    std::unordered_map<std::string, bool> baseline_abstained;
    for (const InstanceScore& score : baseline_scores) {
        baseline_abstained[score.record_id] = score.abstained;
    }
    std::unordered_map<std::string, bool> perturbed_abstained;
    for (const InstanceScore& score : perturbed_scores) {
        perturbed_abstained[score.record_id] = score.abstained;
    }
    if (baseline_abstained.size() != baseline_scores.size() ||
        perturbed_abstained.size() != perturbed_scores.size() ||
        baseline_abstained.size() != perturbed_abstained.size()) {
        throw ArgumentError("transition_rate: score sets do not align");
    }
    for (const auto& [id, abstained] : baseline_abstained) {
        (void)abstained;
        if (perturbed_abstained.find(id) == perturbed_abstained.end()) {
            throw ArgumentError("transition_rate: " + id +
                                " scored at baseline only");
        }
    }

    std::size_t answerable = 0;
    std::size_t flipped = 0;
    for (const QARecord& record : records) {
        if (!record.answerable) continue;
        auto base = baseline_abstained.find(record.id);
        auto pert = perturbed_abstained.find(record.id);
        if (base == baseline_abstained.end() ||
            pert == perturbed_abstained.end()) {
            throw ArgumentError("transition_rate: missing scores for " +
                                record.id);
        }
        ++answerable;
        if (!base->second && pert->second) ++flipped;
    }
    if (answerable == 0) {
        throw ArgumentError("transition_rate: no answerable records");
    }
    return static_cast<double>(flipped) / static_cast<double>(answerable);
}

}  // namespace abstain::metrics
