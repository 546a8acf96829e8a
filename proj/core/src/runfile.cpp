#include "abstain/runfile.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "abstain/errors.hpp"
#include "abstain/postprocess.hpp"

namespace abstain::runfile {

namespace {

nlohmann::json facet_map_to_json(
    const std::map<std::string, metrics::FacetMetrics>& facets) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, facet] : facets) {
        j[key] = {{"n", facet.n},
                  {"task_metric", facet.task_metric},
                  {"abstention_rate", facet.abstention_rate}};
    }
    return j;
}

std::map<std::string, metrics::FacetMetrics> facet_map_from_json(
    const nlohmann::json& j) {
    std::map<std::string, metrics::FacetMetrics> facets;
    for (const auto& [key, value] : j.items()) {
        facets[key] = {value.at("n").get<std::size_t>(),
                       value.at("task_metric").get<double>(),
                       value.at("abstention_rate").get<double>()};
    }
    return facets;
}

}  // namespace

ScoredRun score_responses(
    const std::vector<modelclient::ModelResponse>& responses,
    const std::vector<QARecord>& records, const std::string& run_id,
    const std::string& model, const std::string& abstain_token) {
    if (responses.empty()) {
        throw ArgumentError("score: no responses");
    }
    std::unordered_map<std::string, const QARecord*> by_id;
    for (const QARecord& record : records) by_id[record.id] = &record;

    ScoredRun run;
    run.run_id = run_id;
    run.model = model;
    run.mode = responses.front().mode;
    std::vector<std::string> failed;
    for (const modelclient::ModelResponse& response : responses) {
        if (!response.ok()) {
            failed.push_back(response.record_id);
            continue;
        }
        auto it = by_id.find(response.record_id);
        if (it == by_id.end()) {
            throw ArgumentError("score: no record for " + response.record_id);
        }
        const QARecord& record = *it->second;
        auto answer = postprocess::extract_label(
            response.raw_text, record.question_type, abstain_token);
        run.instance_scores.push_back(
            metrics::score_instance(answer, record, response.mode));
    }
    if (!failed.empty()) {
        std::string ids;
        for (const std::string& id : failed) {
            if (!ids.empty()) ids += ", ";
            ids += id;
        }
        throw ParseError("score: " + std::to_string(failed.size()) +
                         " response(s) carry error markers (" + ids +
                         "); rerun the batch to fill them in");
    }
    run.dataset = records.empty() ? DatasetKind::squad2
                                  : by_id.at(responses.front().record_id)
                                        ->dataset_kind;
    run.metrics = metrics::aggregate(run.instance_scores, records);
    return run;
}

std::string to_json(const ScoredRun& run) {
    nlohmann::json scores = nlohmann::json::array();
    for (const metrics::InstanceScore& score : run.instance_scores) {
        scores.push_back({{"record_id", score.record_id},
                          {"mode", perturb::to_string(score.mode)},
                          {"task_score", score.task_score},
                          {"abstained", score.abstained},
                          {"label", postprocess::to_string(score.label)}});
    }
    nlohmann::json j = {
        {"run_id", run.run_id},
        {"dataset", to_string(run.dataset)},
        {"mode", perturb::to_string(run.mode)},
        {"model", run.model},
        {"metrics",
         {{"n", run.metrics.n},
          {"task_metric", run.metrics.task_metric},
          {"abstention_rate", run.metrics.abstention_rate}}},
        {"facets",
         {{"answerability", facet_map_to_json(run.metrics.answerability_facets)},
          {"question_type",
           facet_map_to_json(run.metrics.question_type_facets)}}},
        {"instance_scores", std::move(scores)},
    };
    return j.dump(1) + "\n";
}

ScoredRun from_json(const std::string& text) {
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        ScoredRun run;
        run.run_id = j.at("run_id").get<std::string>();
        run.dataset = dataset_kind_from_string(j.at("dataset").get<std::string>());
        run.mode = perturb::mode_from_string(j.at("mode").get<std::string>());
        run.model = j.at("model").get<std::string>();
        run.metrics.mode = run.mode;
        run.metrics.n = j.at("metrics").at("n").get<std::size_t>();
        run.metrics.task_metric =
            j.at("metrics").at("task_metric").get<double>();
        run.metrics.abstention_rate =
            j.at("metrics").at("abstention_rate").get<double>();
        run.metrics.answerability_facets =
            facet_map_from_json(j.at("facets").at("answerability"));
        run.metrics.question_type_facets =
            facet_map_from_json(j.at("facets").at("question_type"));
        for (const nlohmann::json& score : j.at("instance_scores")) {
            run.instance_scores.push_back(
                {score.at("record_id").get<std::string>(),
                 perturb::mode_from_string(score.at("mode").get<std::string>()),
                 score.at("task_score").get<double>(),
                 score.at("abstained").get<bool>(),
                 postprocess::label_from_string(
                     score.at("label").get<std::string>())});
        }
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed scored-run file: ") +
                         e.what());
    }
}

void save(const std::filesystem::path& path, const ScoredRun& run) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out << to_json(run);
}

ScoredRun load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open scored-run file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

}  // namespace abstain::runfile
