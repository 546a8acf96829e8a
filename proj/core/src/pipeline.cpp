#include "abstain/pipeline.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "abstain/datasets.hpp"
#include "abstain/errors.hpp"
#include "abstain/hashing.hpp"
#include "abstain/runfile.hpp"
#include "abstain/version.hpp"

namespace abstain::pipeline {

namespace {

namespace fs = std::filesystem;

std::string iso8601_utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ArgumentError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out << text;
}

nlohmann::json canonical_runspec_json(const RunSpec& spec) {
    nlohmann::json j;
    j["dataset"] = {
        {"kind", to_string(spec.dataset.kind)},
        {"test_path", spec.dataset.test_path.string()},
        {"sample_fraction", spec.dataset.sample_fraction},
        {"seed", spec.dataset.seed},
    };
    if (spec.dataset.train_path) {
        j["dataset"]["train_path"] = spec.dataset.train_path->string();
    }
    nlohmann::json modes = nlohmann::json::array();
    for (perturb::Mode mode : spec.perturbations) {
        modes.push_back(perturb::to_string(mode));
    }
    j["perturbations"] = std::move(modes);
    j["prompt"] = {
        {"style", prompts::to_string(spec.style)},
        {"abstain_token", spec.abstain_token},
        {"max_context_words", spec.max_context_words},
    };
    j["model"] = {
        {"endpoint_base_url", spec.model.endpoint_base_url},
        {"model_name", spec.model.model_name},
        {"temperature", spec.model.temperature},
        {"top_p", spec.model.top_p},
        {"max_new_tokens", spec.model.max_new_tokens},
        {"max_parallel", spec.model.max_parallel},
        {"retry_max_attempts", spec.model.retry_max_attempts},
        {"retry_base_delay_ms", spec.model.retry_base_delay.count()},
    };
    if (spec.model.requests_per_minute) {
        j["model"]["requests_per_minute"] = *spec.model.requests_per_minute;
    }
    j["output_dir"] = spec.output_dir.string();
    j["report"] = {{"facets", report::to_string(spec.facet_selection)}};
    return j;
}

// Tracks stage completion in manifest.json so interrupted or repeated
// matrix runs can pick up where they left off.
class Manifest {
public:
    Manifest(fs::path dir, const RunSpec& spec, bool resume)
        : path_(dir / "manifest.json"), resume_(resume) {
        std::string spec_fp = runspec_fingerprint(spec);
        if (resume_ && fs::exists(path_)) {
            try {
                doc_ = nlohmann::json::parse(read_text(path_));
            } catch (const std::exception&) {
                doc_ = nlohmann::json::object();
            }
        }
        if (!doc_.contains("stages")) {
            doc_["stages"] = nlohmann::json::object();
        }
        doc_["harness_version"] = kVersion;
        doc_["runspec_fingerprint"] = spec_fp;
        doc_["seed"] = spec.dataset.seed;
        doc_["sample_fraction"] = spec.dataset.sample_fraction;
        if (!doc_.contains("created_at")) {
            doc_["created_at"] = iso8601_utc_now();
        }
    }

    bool can_skip(const std::string& stage, const std::string& inputs_fp,
                  const std::vector<fs::path>& outputs) const {
        if (!resume_) return false;
        auto it = doc_["stages"].find(stage);
        if (it == doc_["stages"].end()) return false;
        if (it->value("inputs_fingerprint", "") != inputs_fp) return false;
        for (const fs::path& output : outputs) {
            if (!fs::exists(output)) return false;
        }
        return true;
    }

    void record(const std::string& stage, const std::string& inputs_fp,
                const std::vector<fs::path>& outputs) {
        nlohmann::json names = nlohmann::json::array();
        for (const fs::path& output : outputs) {
            names.push_back(output.filename().string());
        }
        doc_["stages"][stage] = {
            {"inputs_fingerprint", inputs_fp},
            {"outputs", std::move(names)},
            {"completed_at", iso8601_utc_now()},
        };
        write_text(path_, doc_.dump(1) + "\n");
    }

private:
    fs::path path_;
    bool resume_;
    nlohmann::json doc_ = nlohmann::json::object();
};

// Fingerprint of a stage's parameters plus the bytes of its input files.
std::string stage_fingerprint(const std::string& params,
                              const std::vector<fs::path>& input_files) {
    std::string key = params;
    for (const fs::path& file : input_files) {
        key.push_back('\x1f');
        key += read_text(file);
    }
    return hashing::sha256_hex(key);
}

std::string model_params(const RunSpec& spec) {
    nlohmann::json j = canonical_runspec_json(spec);
    return j["model"].dump() + j["prompt"].dump();
}

}  // namespace

RunSpec runspec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ArgumentError(std::string("run spec is not valid JSON: ") +
                            e.what());
    }
    RunSpec spec;
    try {
        const nlohmann::json& dataset = j.at("dataset");
        spec.dataset.kind =
            dataset_kind_from_string(dataset.at("kind").get<std::string>());
        spec.dataset.test_path = dataset.at("test_path").get<std::string>();
        if (dataset.contains("train_path")) {
            spec.dataset.train_path =
                fs::path(dataset["train_path"].get<std::string>());
        }
        spec.dataset.sample_fraction = dataset.value("sample_fraction", 1.0);
        spec.dataset.seed = dataset.value("seed", std::uint64_t{0});

        spec.perturbations.clear();
        for (const nlohmann::json& mode :
             j.value("perturbations", nlohmann::json::array())) {
            spec.perturbations.push_back(
                perturb::mode_from_string(mode.get<std::string>()));
        }

        if (j.contains("prompt")) {
            const nlohmann::json& prompt = j["prompt"];
            spec.style = prompts::style_from_string(
                prompt.value("style", "constrained"));
            spec.abstain_token =
                prompt.value("abstain_token", std::string("Unanswerable"));
            spec.max_context_words = prompt.value(
                "max_context_words", prompts::kDefaultMaxContextWords);
        }

        const nlohmann::json& model = j.at("model");
        spec.model.endpoint_base_url =
            model.at("endpoint_base_url").get<std::string>();
        spec.model.model_name = model.at("model_name").get<std::string>();
        spec.model.temperature = model.value("temperature", 0.0);
        spec.model.top_p = model.value("top_p", 1.0);
        spec.model.max_new_tokens = model.value("max_new_tokens", 256);
        spec.model.max_parallel = model.value("max_parallel", 4);
        if (model.contains("requests_per_minute")) {
            spec.model.requests_per_minute =
                model["requests_per_minute"].get<int>();
        }
        spec.model.retry_max_attempts = model.value("retry_max_attempts", 5);
        spec.model.retry_base_delay = std::chrono::milliseconds(
            model.value("retry_base_delay_ms", std::int64_t{1000}));
        spec.api_key = model.value("api_key", "");
        if (model.contains("cache_dir")) {
            spec.cache_dir = fs::path(model["cache_dir"].get<std::string>());
        }

        spec.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("report")) {
            spec.facet_selection = report::facet_selection_from_string(
                j["report"].value("facets", "answerability"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("run spec: ") + e.what());
    }

    // The given-context baseline anchors every delta; keep it first.
    std::vector<perturb::Mode> ordered{perturb::Mode::given};
    for (perturb::Mode mode : spec.perturbations) {
        bool seen = false;
        for (perturb::Mode prior : ordered) seen = seen || prior == mode;
        if (!seen) ordered.push_back(mode);
    }
    spec.perturbations = std::move(ordered);

    for (perturb::Mode mode : spec.perturbations) {
        if ((mode == perturb::Mode::random || mode == perturb::Mode::noisy) &&
            !spec.dataset.train_path) {
            throw ArgumentError("run spec: perturbation '" +
                                perturb::to_string(mode) +
                                "' requires dataset.train_path");
        }
    }
    if (spec.model.max_parallel < 1) {
        throw ArgumentError("run spec: max_parallel must be >= 1");
    }
    if (!(spec.dataset.sample_fraction > 0.0) ||
        spec.dataset.sample_fraction > 1.0) {
        throw ArgumentError("run spec:سsample_fraction must be in (0, 1]");
    }
    return spec;
}

RunSpec load_runspec(const fs::path& path) {
    return runspec_from_json(read_text(path));
}

std::string runspec_fingerprint(const RunSpec& spec) {
    return hashing::sha256_hex(canonical_runspec_json(spec).dump());
}

std::vector<prompts::RenderedPrompt> render_prompts(
    const std::vector<perturb::PerturbedInstance>& instances,
    const std::vector<QARecord>& records, prompts::Style style,
    const std::string& abstain_token, std::size_t max_context_words) {
    std::unordered_map<std::string, const QARecord*> by_id;
    for (const QARecord& record : records) by_id[record.id] = &record;
    std::vector<prompts::RenderedPrompt> rendered;
    rendered.reserve(instances.size());
    for (const perturb::PerturbedInstance& instance : instances) {
        auto it = by_id.find(instance.record_id);
        if (it == by_id.end()) {
            throw ArgumentError("render: no record for " + instance.record_id);
        }
        prompts::PromptSpec spec;
        spec.dataset_kind = it->second->dataset_kind;
        spec.style = style;
        spec.has_context = instance.has_context_prompt;
        spec.abstain_token = abstain_token;
        rendered.push_back(prompts::render(instance, *it->second, spec,
                                           max_context_words));
    }
    return rendered;
}

MatrixResult run_matrix(const RunSpec& spec, bool resume,
                        modelclient::Transport* transport_override,
                        std::ostream* log) {
    fs::create_directories(spec.output_dir);
    Manifest manifest(spec.output_dir, spec, resume);
    MatrixResult result;

    auto note = [&](const std::string& stage, bool skipped) {
        result.stage_skipped[stage] = skipped;
        if (log != nullptr) {
            *log << (skipped ? "[skip] " : "[run]  ") << stage << "\n";
        }
    };

    // Stage helper: run `body` unless the manifest says the outputs are
    // already up to date for these inputs.
    auto stage = [&](const std::string& name, const std::string& params,
                     const std::vector<fs::path>& inputs,
                     const std::vector<fs::path>& outputs, auto&& body) {
        std::string fp = stage_fingerprint(params, inputs);
        if (manifest.can_skip(name, fp, outputs)) {
            note(name, true);
        } else {
            body();
            manifest.record(name, fp, outputs);
            note(name, false);
        }
        for (const fs::path& output : outputs) {
            result.outputs.push_back(output);
        }
    };

    const fs::path records_path = spec.output_dir / "records.jsonl";
    const fs::path sampled_path = spec.output_dir / "sampled.jsonl";
    const fs::path train_path = spec.output_dir / "train.jsonl";
    const std::string kind = to_string(spec.dataset.kind);

    stage("ingest_test", "ingest:" + kind + ":test",
          {spec.dataset.test_path}, {records_path}, [&] {
              datasets::write_jsonl(
                  records_path, datasets::ingest(spec.dataset.test_path,
                                                 spec.dataset.kind,
                                                 Split::test));
          });

    stage("sample",
          "sample:" + std::to_string(spec.dataset.sample_fraction) + ":" +
              std::to_string(spec.dataset.seed),
          {records_path}, {sampled_path}, [&] {
              datasets::write_jsonl(
                  sampled_path,
                  datasets::stratified_sample(
                      datasets::read_jsonl(records_path),
                      spec.dataset.sample_fraction, spec.dataset.seed));
          });

    bool needs_pool = false;
    for (perturb::Mode mode : spec.perturbations) {
        needs_pool = needs_pool || mode == perturb::Mode::random ||
                     mode == perturb::Mode::noisy;
    }
    if (needs_pool) {
        stage("ingest_train", "ingest:" + kind + ":train",
              {*spec.dataset.train_path}, {train_path}, [&] {
                  datasets::write_jsonl(
                      train_path, datasets::ingest(*spec.dataset.train_path,
                                                   spec.dataset.kind,
                                                   Split::train));
              });
    }

    fs::path cache_dir =
        spec.cache_dir ? *spec.cache_dir : spec.output_dir / "cache";
    modelclient::ResponseCache cache(cache_dir);
    modelclient::ModelConfig model = spec.model;

    std::unique_ptr<modelclient::HttpTransport> owned_transport;
    modelclient::Transport* transport = transport_override;
    if (transport == nullptr) {
        const char* env_key = std::getenv("ABSTAIN_PROBE_API_KEY");
        std::string api_key = env_key != nullptr ? env_key : spec.api_key;
        owned_transport = std::make_unique<modelclient::HttpTransport>(
            model.endpoint_base_url, api_key);
        transport = owned_transport.get();
    }

    std::vector<fs::path> scored_paths;
    for (perturb::Mode mode : spec.perturbations) {
        const std::string mode_name = perturb::to_string(mode);
        const fs::path instances_path =
            spec.output_dir / ("instances_" + mode_name + ".jsonl");
        const fs::path responses_path =
            spec.output_dir / ("responses_" + mode_name + ".jsonl");
        const fs::path scored_path =
            spec.output_dir / ("run_" + mode_name + ".json");

        bool pool_mode = mode == perturb::Mode::random ||
                         mode == perturb::Mode::noisy;
        std::vector<fs::path> perturb_inputs = {sampled_path};
        if (pool_mode) perturb_inputs.push_back(train_path);
        stage("perturb_" + mode_name,
              "perturb:" + mode_name + ":" +
                  std::to_string(spec.dataset.seed),
              perturb_inputs, {instances_path}, [&] {
                  auto records = datasets::read_jsonl(sampled_path);
                  std::optional<perturb::ContextPool> pool;
                  if (pool_mode) {
                      pool = perturb::build_pool(
                          datasets::read_jsonl(train_path));
                  }
                  std::vector<perturb::PerturbedInstance> instances;
                  instances.reserve(records.size());
                  for (const QARecord& record : records) {
                      instances.push_back(perturb::apply(
                          record, mode, pool ? &*pool : nullptr,
                          spec.dataset.seed));
                  }
                  write_text(instances_path, perturb::to_jsonl(instances));
              });

        stage("run_" + mode_name, "run:" + model_params(spec),
              {instances_path, sampled_path}, {responses_path}, [&] {
                  auto records = datasets::read_jsonl(sampled_path);
                  auto instances =
                      perturb::from_jsonl(read_text(instances_path));
                  auto rendered = render_prompts(instances, records,
                                                 spec.style,
                                                 spec.abstain_token,
                                                 spec.max_context_words);
                  auto responses = modelclient::run_batch(
                      instances, rendered, model, *transport, &cache);
                  write_text(responses_path,
                             modelclient::to_jsonl(responses));
              });

        stage("score_" + mode_name,
              "score:" + spec.abstain_token + ":" + kind,
              {responses_path, sampled_path}, {scored_path}, [&] {
                  runfile::save(
                      scored_path,
                      runfile::score_responses(
                          modelclient::from_jsonl(read_text(responses_path)),
                          datasets::read_jsonl(sampled_path),
                          kind + "_" + mode_name, model.model_name,
                          spec.abstain_token));
              });
        scored_paths.push_back(scored_path);
    }

    const fs::path report_md = spec.output_dir / "report.md";
    const fs::path report_csv = spec.output_dir / "report.csv";
    const fs::path report_json = spec.output_dir / "report.json";
    const fs::path transitions_md = spec.output_dir / "transitions.md";
    stage("report",
          "report:" + report::to_string(spec.facet_selection),
          scored_paths,
          {report_md, report_csv, report_json, transitions_md}, [&] {
              std::vector<runfile::ScoredRun> runs;
              for (const fs::path& path : scored_paths) {
                  runs.push_back(runfile::load(path));
              }
              const runfile::ScoredRun& baseline = runs.front();
              std::vector<report::ReportRun> report_runs;
              report::ReportSpec report_spec;
              report_spec.baseline_run_id = baseline.run_id;
              report_spec.facet_selection = spec.facet_selection;
              report_spec.dataset_label = kind;
              report_spec.model_label = model.model_name;
              report_runs.push_back({baseline.run_id, baseline.metrics, {}});
              std::vector<std::pair<std::string, double>> transitions;
              auto records = datasets::read_jsonl(sampled_path);
              for (std::size_t i = 1; i < runs.size(); ++i) {
                  report_runs.push_back(
                      {runs[i].run_id, runs[i].metrics,
                       metrics::delta(runs[i].metrics, baseline.metrics)});
                  report_spec.comparison_run_ids.push_back(runs[i].run_id);
                  transitions.emplace_back(
                      perturb::to_string(runs[i].mode),
                      metrics::transition_rate(baseline.instance_scores,
                                               runs[i].instance_scores,
                                               records));
              }
              report_spec.format = report::Format::markdown;
              write_text(report_md, report::emit(report_runs, report_spec));
              report_spec.format = report::Format::csv;
              write_text(report_csv, report::emit(report_runs, report_spec));
              report_spec.format = report::Format::json;
              write_text(report_json, report::emit(report_runs, report_spec));
              if (!transitions.empty()) {
                  write_text(transitions_md,
                             report::emit_transition_table(transitions));
              } else {
                  write_text(transitions_md, "no perturbation runs\n");
              }
          });

    return result;
}

}  // namespace pipeline
