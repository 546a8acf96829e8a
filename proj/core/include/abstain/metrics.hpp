#pragma once

#include <map>
#include <string>
#include <vector>

#include "abstain/perturb.hpp"
#include "abstain/postprocess.hpp"
#include "abstain/types.hpp"

namespace abstain::metrics {

struct InstanceScore {
    std::string record_id;
    perturb::Mode mode = perturb::Mode::given;
    double task_score = 0.0;  // in [0, 1]
    bool abstained = false;
    postprocess::Label label = postprocess::Label::Unparseable;
};

struct FacetMetrics {
    std::size_t n = 0;
    double task_metric = 0.0;      // percent
    double abstention_rate = 0.0;  // in [0, 1]
};

// Aggregate over one run: micro-averaged task metric (token F1 for
// squad2/qasper, accuracy for the boolean datasets, x100 either way) and
// the abstention rate, plus two facet partitions: answerable vs
// unanswerable, and question type with unanswerable questions as their
// own facet.
struct RunMetrics {
    perturb::Mode mode = perturb::Mode::given;
    std::size_t n = 0;
    double task_metric = 0.0;
    double abstention_rate = 0.0;
    std::map<std::string, FacetMetrics> answerability_facets;
    std::map<std::string, FacetMetrics> question_type_facets;
};

struct FacetDelta {
    double task_metric = 0.0;
    double abstention_rate_pct = 0.0;  // abstention delta, in percent points
};

struct RunDelta {
    perturb::Mode mode = perturb::Mode::given;
    FacetDelta overall;
    std::map<std::string, FacetDelta> answerability_facets;
    std::map<std::string, FacetDelta> question_type_facets;
};

// Token-multiset F1 between two already-normalized strings. Both empty
// compares equal (1.0); exactly one empty is 0.0.
double token_f1(const std::string& prediction, const std::string& reference);

// Score one post-processed answer against its record's gold references.
InstanceScore score_instance(const postprocess::NormalizedAnswer& answer,
                             const QARecord& record, perturb::Mode mode);

RunMetrics aggregate(const std::vector<InstanceScore>& scores,
                     const std::vector<QARecord>& records);

// run minus baseline, overall and per facet; abstention deltas are in
// percent points. Facet sets and instance counts must match.
RunDelta delta(const RunMetrics& run, const RunMetrics& baseline);

// Among answerable records, the fraction that were answered at baseline
// and abstained when perturbed.
double transition_rate(const std::vector<InstanceScore>& baseline_scores,
                       const std::vector<InstanceScore>& perturbed_scores,
                       const std::vector<QARecord>& records);

}  // namespace abstain::metrics
