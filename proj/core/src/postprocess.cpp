#include "abstain/postprocess.hpp"

#include <cctype>
#include <sstream>
#include <vector>

#include "abstain/errors.hpp"

namespace abstain::postprocess {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string ascii_lower(std::string s) {
    for (char& c : s) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    return s.substr(begin, end - begin);
}

std::string strip_surrounding_punct(const std::string& token) {
    size_t begin = 0;
    size_t end = token.size();
    while (begin < end && is_punct(token[begin])) ++begin;
    while (end > begin && is_punct(token[end - 1])) --end;
    return token.substr(begin, end - begin);
}

std::vector<std::string> whitespace_tokens(const std::string& s,
                                           size_t limit) {
    std::vector<std::string> tokens;
    std::istringstream in(s);
    std::string token;
    while (tokens.size() < limit && in >> token) {
        tokens.push_back(token);
    }
    return tokens;
}

}  // namespace

std::string to_string(Label label) {
    switch (label) {
        case Label::Yes: return "Yes";
        case Label::No: return "No";
        case Label::Unanswerable: return "Unanswerable";
        case Label::Freeform: return "Freeform";
        case Label::Unparseable: return "Unparseable";
    }
    throw ArgumentError("unknown label");
}

Label label_from_string(const std::string& s) {
    if (s == "Yes") return Label::Yes;
    if (s == "No") return Label::No;
    if (s == "Unanswerable") return Label::Unanswerable;
    if (s == "Freeform") return Label::Freeform;
    if (s == "Unparseable") return Label::Unparseable;
    throw ArgumentError("unknown label: " + s);
}

std::string clean(const std::string& raw) {
    std::string s = trim(raw);
    static constexpr char kPrefix[] = "answer:";
    if (s.size() >= 7) {
        bool has_prefix = true;
        for (size_t i = 0; i < 7; ++i) {
            if (std::tolower(static_cast<unsigned char>(s[i])) != kPrefix[i]) {
                has_prefix = false;
                break;
            }
        }
        if (has_prefix) {
            s = trim(s.substr(7));
        }
    }
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

NormalizedAnswer extract_label(const std::string& raw,
                               QuestionType question_type,
                               const std::string& abstain_token,
                               std::size_t window) {
    const std::string cleaned = clean(raw);
    const std::string abstain_word = ascii_lower(abstain_token);

    enum class Match { none, yes, no, abstain };
    Match first = Match::none;
    for (const std::string& token : whitespace_tokens(cleaned, window)) {
        std::string word = ascii_lower(strip_surrounding_punct(token));
        if (word == "yes") {
            first = Match::yes;
        } else if (word == "no") {
            first = Match::no;
        } else if (word == abstain_word || word == "unanswerable") {
            first = Match::abstain;
        } else {
            continue;
        }
        break;  // first occurrence wins
    }

    if (question_type == QuestionType::boolean) {
        switch (first) {
            case Match::yes: return {Label::Yes, "Yes"};
            case Match::no: return {Label::No, "No"};
            case Match::abstain:
                return {Label::Unanswerable, "Unanswerable"};
            case Match::none: return {Label::Unparseable, "Unparseable"};
        }
    }
    if (first == Match::abstain) {
        return {Label::Unanswerable, "Unanswerable"};
    }
    return {Label::Freeform, cleaned};
}

std::string normalize_for_f1(const std::string& answer_text) {
    std::string lowered = ascii_lower(answer_text);
    std::string no_punct;
    no_punct.reserve(lowered.size());
    for (char c : lowered) {
        if (!is_punct(c)) no_punct.push_back(c);
    }
    // Drop whole-word articles, then collapse whitespace.
    std::istringstream in(no_punct);
    std::string token;
    std::string out;
    while (in >> token) {
        if (token == "a" || token == "an" || token == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

}  // namespace abstain::postprocess
