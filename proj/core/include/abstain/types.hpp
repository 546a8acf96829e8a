#pragma once

#include <string>
#include <vector>

namespace abstain {

enum class DatasetKind { squad2, pubmedqa, bioasq, qasper };
enum class Split { train, test };
enum class QuestionType { extractive, abstractive, boolean };

std::string to_string(DatasetKind kind);
std::string to_string(Split split);
std::string to_string(QuestionType type);

DatasetKind dataset_kind_from_string(const std::string& s);
Split split_from_string(const std::string& s);
QuestionType question_type_from_string(const std::string& s);

struct ReferenceAnswer {
    enum class Kind { text, yes, no, unanswerable };

    Kind kind = Kind::text;
    // Gold string for kind=text; the literal "yes"/"no"/"unanswerable"
    // for the other kinds.
    std::string text;

    static ReferenceAnswer make_text(std::string gold);
    static ReferenceAnswer make_yes();
    static ReferenceAnswer make_no();
    static ReferenceAnswer make_unanswerable();

    bool operator==(const ReferenceAnswer&) const = default;
};

std::string to_string(ReferenceAnswer::Kind kind);
ReferenceAnswer::Kind reference_kind_from_string(const std::string& s);

// One normalized question/context/reference tuple. `context` is the gold
// context as given by the dataset (may be empty for unanswerable QASPER
// questions); `references` is nonempty.
struct QARecord {
    std::string id;  // "<dataset_kind>:<split>:<native_id>"
    DatasetKind dataset_kind = DatasetKind::squad2;
    Split split = Split::test;
    std::string question;
    std::string context;
    std::vector<ReferenceAnswer> references;
    QuestionType question_type = QuestionType::extractive;
    bool answerable = true;

    bool operator==(const QARecord&) const = default;
};

std::string make_record_id(DatasetKind kind, Split split,
                           const std::string& native_id);

}  // namespace abstain
