#include "abstain/types.hpp"

#include "abstain/errors.hpp"

namespace abstain {

std::string to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::squad2: return "squad2";
        case DatasetKind::pubmedqa: return "pubmedqa";
        case DatasetKind::bioasq: return "bioasq";
        case DatasetKind::qasper: return "qasper";
    }
    throw ArgumentError("unknown dataset kind");
}

std::string to_string(Split split) {
    return split == Split::train ? "train" : "test";
}

std::string to_string(QuestionType type) {
    switch (type) {
        case QuestionType::extractive: return "extractive";
        case QuestionType::abstractive: return "abstractive";
        case QuestionType::boolean: return "boolean";
    }
    throw ArgumentError("unknown question type");
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "squad2") return DatasetKind::squad2;
    if (s == "pubmedqa") return DatasetKind::pubmedqa;
    if (s == "bioasq") return DatasetKind::bioasq;
    if (s == "qasper") return DatasetKind::qasper;
    throw ArgumentError("unknown dataset kind: " + s);
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw ArgumentError("unknown split: " + s);
}

QuestionType question_type_from_string(const std::string& s) {
    if (s == "extractive") return QuestionType::extractive;
    if (s == "abstractive") return QuestionType::abstractive;
    if (s == "boolean") return QuestionType::boolean;
    throw ArgumentError("unknown question type: " + s);
}

std::string to_string(ReferenceAnswer::Kind kind) {
    switch (kind) {
        case ReferenceAnswer::Kind::text: return "text";
        case ReferenceAnswer::Kind::yes: return "yes";
        case ReferenceAnswer::Kind::no: return "no";
        case ReferenceAnswer::Kind::unanswerable: return "unanswerable";
    }
    throw ArgumentError("unknown reference kind");
}

ReferenceAnswer::Kind reference_kind_from_string(const std::string& s) {
    if (s == "text") return ReferenceAnswer::Kind::text;
    if (s == "yes") return ReferenceAnswer::Kind::yes;
    if (s == "no") return ReferenceAnswer::Kind::no;
    if (s == "unanswerable") return ReferenceAnswer::Kind::unanswerable;
    throw ArgumentError("unknown reference kind: " + s);
}

ReferenceAnswer ReferenceAnswer::make_text(std::string gold) {
    return {Kind::text, std::move(gold)};
}

ReferenceAnswer ReferenceAnswer::make_yes() { return {Kind::yes, "yes"}; }

ReferenceAnswer ReferenceAnswer::make_no() { return {Kind::no, "no"}; }

ReferenceAnswer ReferenceAnswer::make_unanswerable() {
    return {Kind::unanswerable, "unanswerable"};
}

std::string make_record_id(DatasetKind kind, Split split,
                           const std::string& native_id) {
    return to_string(kind) + ":" + to_string(split) + ":" + native_id;
}

}  // namespace abstain
