#include "abstain/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "abstain/errors.hpp"
#include "abstain/hashing.hpp"

namespace abstain::datasets {

namespace {

// Upstream maps (PubMedQA, QASPER) are keyed objects; insertion order is
// the file order, which we preserve.
using ojson = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (text.empty()) {
        throw ParseError("empty file: " + path.string());
    }
    return text;
}

ojson parse_json(const std::filesystem::path& path) {
    try {
        return ojson::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": invalid JSON: " + e.what());
    }
}

[[noreturn]] void schema_error(const std::string& dataset,
                               const std::string& native_id,
                               const std::string& detail) {
    throw ParseError(dataset + ": item '" + native_id + "': " + detail);
}

const ojson& require(const ojson& obj, const char* field,
                     const std::string& dataset,
                     const std::string& native_id) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        schema_error(dataset, native_id,
                     std::string("missing field '") + field + "'");
    }
    return *it;
}

std::string require_string(const ojson& obj, const char* field,
                           const std::string& dataset,
                           const std::string& native_id) {
    const ojson& value = require(obj, field, dataset, native_id);
    if (!value.is_string()) {
        schema_error(dataset, native_id,
                     std::string("field '") + field + "' is not a string");
    }
    return value.get<std::string>();
}

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string ascii_lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

std::vector<QARecord> ingest_squad2(const ojson& root, Split split) {
    if (!root.is_object() || !root.contains("data") ||
        !root["data"].is_array()) {
        throw ParseError("squad2: top level must be {\"data\": [...]}");
    }
    std::vector<QARecord> records;
    for (const ojson& article : root["data"]) {
        if (!article.contains("paragraphs") ||
            !article["paragraphs"].is_array()) {
            schema_error("squad2", article.value("title", "<untitled>"),
                         "missing field 'paragraphs'");
        }
        for (const ojson& paragraph : article["paragraphs"]) {
            std::string context =
                require_string(paragraph, "context", "squad2", "<paragraph>");
            const ojson& qas =
                require(paragraph, "qas", "squad2", "<paragraph>");
            for (const ojson& qa : qas) {
                std::string native_id =
                    require_string(qa, "id", "squad2", "<qa>");
                QARecord record;
                record.id = make_record_id(DatasetKind::squad2, split,
                                           native_id);
                record.dataset_kind = DatasetKind::squad2;
                record.split = split;
                record.question =
                    require_string(qa, "question", "squad2", native_id);
                record.context = context;  // unchanged even when impossible
                record.question_type = QuestionType::extractive;
                bool impossible = qa.value("is_impossible", false);
                if (impossible) {
                    record.answerable = false;
                    record.references = {ReferenceAnswer::make_unanswerable()};
                } else {
                    const ojson& answers =
                        require(qa, "answers", "squad2", native_id);
                    if (!answers.is_array() || answers.empty()) {
                        schema_error("squad2", native_id,
                                     "answerable question without answers");
                    }
                    for (const ojson& answer : answers) {
                        record.references.push_back(ReferenceAnswer::make_text(
                            require_string(answer, "text", "squad2",
                                           native_id)));
                    }
                }
                records.push_back(std::move(record));
            }
        }
    }
    return records;
}

std::vector<QARecord> ingest_pubmedqa(const ojson& root, Split split) {
    if (!root.is_object()) {
        throw ParseError("pubmedqa: top level must be an id -> item map");
    }
    std::vector<QARecord> records;
    for (const auto& [native_id, item] : root.items()) {
        QARecord record;
        record.id = make_record_id(DatasetKind::pubmedqa, split, native_id);
        record.dataset_kind = DatasetKind::pubmedqa;
        record.split = split;
        record.question =
            require_string(item, "QUESTION", "pubmedqa", native_id);
        const ojson& contexts =
            require(item, "CONTEXTS", "pubmedqa", native_id);
        if (!contexts.is_array()) {
            schema_error("pubmedqa", native_id, "CONTEXTS is not an array");
        }
        std::vector<std::string> sections;
        for (const ojson& section : contexts) {
            if (!section.is_string()) {
                schema_error("pubmedqa", native_id,
                             "CONTEXTS entry is not a string");
            }
            sections.push_back(section.get<std::string>());
        }
        record.context = join(sections, " ");
        record.question_type = QuestionType::boolean;
        std::string decision = ascii_lower(
            require_string(item, "final_decision", "pubmedqa", native_id));
        if (decision == "yes") {
            record.references = {ReferenceAnswer::make_yes()};
        } else if (decision == "no") {
            record.references = {ReferenceAnswer::make_no()};
        } else if (decision == "maybe") {
            record.answerable = false;
            record.references = {ReferenceAnswer::make_unanswerable()};
        } else {
            schema_error("pubmedqa", native_id,
                         "final_decision '" + decision +
                             "' is not yes/no/maybe");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<QARecord> ingest_bioasq(const ojson& root, Split split) {
    if (!root.is_object() || !root.contains("questions") ||
        !root["questions"].is_array()) {
        throw ParseError("bioasq: top level must be {\"questions\": [...]}");
    }
    std::vector<QARecord> records;
    for (const ojson& item : root["questions"]) {
        std::string native_id = require_string(item, "id", "bioasq", "<qa>");
        if (ascii_lower(item.value("type", "")) != "yesno") {
            continue;  // only yes/no questions are in scope
        }
        QARecord record;
        record.id = make_record_id(DatasetKind::bioasq, split, native_id);
        record.dataset_kind = DatasetKind::bioasq;
        record.split = split;
        record.question = require_string(item, "body", "bioasq", native_id);
        std::vector<std::string> snippet_texts;
        if (item.contains("snippets")) {
            if (!item["snippets"].is_array()) {
                schema_error("bioasq", native_id, "snippets is not an array");
            }
            for (const ojson& snippet : item["snippets"]) {
                snippet_texts.push_back(
                    require_string(snippet, "text", "bioasq", native_id));
            }
        }
        record.context = join(snippet_texts, " ");
        record.question_type = QuestionType::boolean;
        std::string answer = ascii_lower(
            require_string(item, "exact_answer", "bioasq", native_id));
        if (answer == "yes") {
            record.references = {ReferenceAnswer::make_yes()};
        } else if (answer == "no") {
            record.references = {ReferenceAnswer::make_no()};
        } else {
            schema_error("bioasq", native_id,
                         "exact_answer '" + answer + "' is not yes/no");
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<QARecord> ingest_qasper(const ojson& root, Split split) {
    if (!root.is_object()) {
        throw ParseError("qasper: top level must be a paper id -> paper map");
    }
    std::vector<QARecord> records;
    for (const auto& [paper_id, paper] : root.items()) {
        const ojson& qas = require(paper, "qas", "qasper", paper_id);
        if (!qas.is_array()) {
            schema_error("qasper", paper_id, "qas is not an array");
        }
        size_t qa_index = 0;
        for (const ojson& qa : qas) {
            std::string native_id = qa.value(
                "question_id", paper_id + "#" + std::to_string(qa_index));
            ++qa_index;
            QARecord record;
            record.id = make_record_id(DatasetKind::qasper, split, native_id);
            record.dataset_kind = DatasetKind::qasper;
            record.split = split;
            record.question =
                require_string(qa, "question", "qasper", native_id);

            const ojson& annotations =
                require(qa, "answers", "qasper", native_id);
            if (!annotations.is_array() || annotations.empty()) {
                schema_error("qasper", native_id, "no answer annotations");
            }

            // Union of evidence paragraphs across annotators, first-seen
            // order (each annotator lists evidence in document order).
            std::vector<std::string> evidence;
            std::set<std::string> seen_evidence;
            bool all_unanswerable = true;
            bool any_span = false;
            bool any_boolean = false;
            std::vector<ReferenceAnswer> references;
            std::set<std::pair<ReferenceAnswer::Kind, std::string>> seen_refs;
            auto add_reference = [&](ReferenceAnswer ref) {
                if (seen_refs.insert({ref.kind, ref.text}).second) {
                    references.push_back(std::move(ref));
                }
            };

            for (const ojson& annotation : annotations) {
                const ojson& answer =
                    require(annotation, "answer", "qasper", native_id);
                for (const ojson& paragraph :
                     answer.value("evidence", ojson::array())) {
                    if (!paragraph.is_string()) {
                        schema_error("qasper", native_id,
                                     "evidence entry is not a string");
                    }
                    std::string text = paragraph.get<std::string>();
                    if (!text.empty() && seen_evidence.insert(text).second) {
                        evidence.push_back(std::move(text));
                    }
                }
                if (answer.value("unanswerable", false)) {
                    continue;
                }
                all_unanswerable = false;
                for (const ojson& span :
                     answer.value("extractive_spans", ojson::array())) {
                    if (!span.is_string()) {
                        schema_error("qasper", native_id,
                                     "extractive span is not a string");
                    }
                    any_span = true;
                    add_reference(
                        ReferenceAnswer::make_text(span.get<std::string>()));
                }
                std::string free_form = answer.value("free_form_answer", "");
                if (!free_form.empty()) {
                    add_reference(ReferenceAnswer::make_text(free_form));
                }
                if (answer.contains("yes_no") && !answer["yes_no"].is_null()) {
                    any_boolean = true;
                    add_reference(answer["yes_no"].get<bool>()
                                      ? ReferenceAnswer::make_yes()
                                      : ReferenceAnswer::make_no());
                }
            }

            if (all_unanswerable) {
                record.answerable = false;
                record.context = "";  // unanswerable QASPER has no evidence
                record.references = {ReferenceAnswer::make_unanswerable()};
            } else {
                if (references.empty()) {
                    schema_error("qasper", native_id,
                                 "answerable question without any reference");
                }
                record.context = join(evidence, "\n");
                record.references = std::move(references);
            }
            record.question_type = any_boolean ? QuestionType::boolean
                                  : any_span   ? QuestionType::extractive
                                               : QuestionType::abstractive;
            records.push_back(std::move(record));
        }
    }
    return records;
}

nlohmann::json record_to_json(const QARecord& record) {
    nlohmann::json refs = nlohmann::json::array();
    for (const ReferenceAnswer& ref : record.references) {
        refs.push_back({{"kind", to_string(ref.kind)}, {"text", ref.text}});
    }
    return {
        {"id", record.id},
        {"dataset_kind", to_string(record.dataset_kind)},
        {"split", to_string(record.split)},
        {"question", record.question},
        {"context", record.context},
        {"references", std::move(refs)},
        {"question_type", to_string(record.question_type)},
        {"answerable", record.answerable},
    };
}

QARecord record_from_json(const nlohmann::json& j, size_t line_no) {
    auto fail = [line_no](const std::string& detail) -> void {
        throw ParseError("records jsonl line " + std::to_string(line_no) +
                         ": " + detail);
    };
    if (!j.is_object()) fail("not a JSON object");
    for (const char* field :
         {"id", "dataset_kind", "split", "question", "context", "references",
          "question_type", "answerable"}) {
        if (!j.contains(field)) {
            fail(std::string("missing field '") + field + "'");
        }
    }
    QARecord record;
    try {
        record.id = j["id"].get<std::string>();
        record.dataset_kind =
            dataset_kind_from_string(j["dataset_kind"].get<std::string>());
        record.split = split_from_string(j["split"].get<std::string>());
        record.question = j["question"].get<std::string>();
        record.context = j["context"].get<std::string>();
        record.question_type =
            question_type_from_string(j["question_type"].get<std::string>());
        record.answerable = j["answerable"].get<bool>();
        for (const nlohmann::json& ref : j["references"]) {
            record.references.push_back(
                {reference_kind_from_string(ref.at("kind").get<std::string>()),
                 ref.at("text").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    } catch (const ArgumentError& e) {
        fail(e.what());
    }
    return record;
}

}  // namespace

std::vector<QARecord> ingest(const std::filesystem::path& path,
                             DatasetKind kind, Split split) {
    ojson root = parse_json(path);
    std::vector<QARecord> records;
    switch (kind) {
        case DatasetKind::squad2: records = ingest_squad2(root, split); break;
        case DatasetKind::pubmedqa:
            records = ingest_pubmedqa(root, split);
            break;
        case DatasetKind::bioasq: records = ingest_bioasq(root, split); break;
        case DatasetKind::qasper: records = ingest_qasper(root, split); break;
    }
    if (records.empty()) {
        throw ParseError(path.string() + ": no QA items for " +
                         to_string(kind));
    }
    return records;
}

std::vector<QARecord> stratified_sample(const std::vector<QARecord>& records,
                                        double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ArgumentError("sample fraction must be in (0, 1], got " +
                            std::to_string(fraction));
    }
    if (records.empty()) {
        throw ArgumentError("stratified_sample: no records");
    }

    std::map<std::pair<QuestionType, bool>, std::vector<const QARecord*>>
        strata;
    for (const QARecord& record : records) {
        strata[{record.question_type, record.answerable}].push_back(&record);
    }

    std::vector<QARecord> sampled;
    for (auto& [key, stratum] : strata) {
        // Rank by the per-record selection digest: deterministic in
        // (seed, id) only, so the choice survives input reordering.
        std::vector<std::pair<hashing::Sha256Digest, const QARecord*>> ranked;
        ranked.reserve(stratum.size());
        for (const QARecord* record : stratum) {
            ranked.emplace_back(hashing::selection_digest(seed, record->id),
                                record);
        }
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first < b.first;
                      return a.second->id < b.second->id;
                  });
        // Tolerate the binary representation of decimal fractions
        // (0.1 * 140 must stay 14, not 15).
        auto take = static_cast<size_t>(
            std::ceil(fraction * static_cast<double>(stratum.size()) - 1e-9));
        take = std::max<size_t>(1, std::min(take, ranked.size()));
        for (size_t i = 0; i < take; ++i) {
            sampled.push_back(*ranked[i].second);
        }
    }
    std::sort(sampled.begin(), sampled.end(),
              [](const QARecord& a, const QARecord& b) { return a.id < b.id; });
    return sampled;
}

std::vector<std::string> validate(const std::vector<QARecord>& records) {
    std::vector<std::string> violations;
    auto flag = [&](const QARecord& record, const std::string& what) {
        violations.push_back(record.id + ": " + what);
    };

    std::set<std::string> seen_ids;
    for (const QARecord& record : records) {
        if (!seen_ids.insert(record.id).second) {
            flag(record, "duplicate id");
        }
        std::string prefix = to_string(record.dataset_kind) + ":" +
                             to_string(record.split) + ":";
        if (record.id.rfind(prefix, 0) != 0) {
            flag(record, "id does not match '" + prefix + "<native_id>'");
        }
        if (record.references.empty()) {
            flag(record, "references must be nonempty");
        }
        if (!record.answerable) {
            bool single_unanswerable =
                record.references.size() == 1 &&
                record.references[0].kind ==
                    ReferenceAnswer::Kind::unanswerable;
            if (!single_unanswerable) {
                flag(record,
                     "unanswerable record must carry exactly one "
                     "unanswerable reference");
            }
        }
        for (const ReferenceAnswer& ref : record.references) {
            bool literal_ok =
                (ref.kind != ReferenceAnswer::Kind::yes || ref.text == "yes") &&
                (ref.kind != ReferenceAnswer::Kind::no || ref.text == "no") &&
                (ref.kind != ReferenceAnswer::Kind::unanswerable ||
                 ref.text == "unanswerable");
            if (!literal_ok) {
                flag(record, "reference text does not match its kind '" +
                                 to_string(ref.kind) + "'");
            }
        }
        if ((record.dataset_kind == DatasetKind::pubmedqa ||
             record.dataset_kind == DatasetKind::bioasq) &&
            record.question_type != QuestionType::boolean) {
            flag(record, to_string(record.dataset_kind) +
                             " records must be boolean questions");
        }
        if (record.dataset_kind == DatasetKind::bioasq &&
            !record.answerable) {
            flag(record, "bioasq records must be answerable");
        }
        if (record.dataset_kind == DatasetKind::qasper &&
            !record.answerable && !record.context.empty()) {
            flag(record, "unanswerable qasper record must have empty context");
        }
    }
    return violations;
}

std::string to_jsonl(const std::vector<QARecord>& records) {
    std::string out;
    for (const QARecord& record : records) {
        out += record_to_json(record).dump();
        out += '\n';
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<QARecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out << to_jsonl(records);
}

std::vector<QARecord> from_jsonl(const std::string& text) {
    std::vector<QARecord> records;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("records jsonl line " + std::to_string(line_no) +
                             ": " + e.what());
        }
        records.push_back(record_from_json(j, line_no));
    }
    return records;
}

std::vector<QARecord> read_jsonl(const std::filesystem::path& path) {
    return from_jsonl(read_file(path));
}

}  // namespace abstain::datasets
