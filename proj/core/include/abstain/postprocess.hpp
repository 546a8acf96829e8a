#pragma once

#include <cstddef>
#include <string>

#include "abstain/types.hpp"

namespace abstain::postprocess {

enum class Label { Yes, No, Unanswerable, Freeform, Unparseable };

std::string to_string(Label label);
Label label_from_string(const std::string& s);

struct NormalizedAnswer {
    Label label = Label::Unparseable;
    // Cleaned answer string for Freeform; the canonical label word
    // otherwise.
    std::string text;

    bool operator==(const NormalizedAnswer&) const = default;
};

// Trim, drop a leading "Answer:" prefix (case-insensitive), collapse
// internal whitespace runs to single spaces.
std::string clean(const std::string& raw);

// How many leading tokens the label scan inspects.
inline constexpr std::size_t kDefaultLabelWindow = 10;

// First-words label mapping. Tokens are whitespace-split, lowercased and
// stripped of surrounding punctuation; the vocabulary is yes/no plus the
// abstention token ("unanswerable" is always recognized, even under the
// "Maybe" ablation). Boolean questions take the first matching token or
// come back Unparseable; other question types abstain only when the first
// match is the abstention word and otherwise keep the cleaned text.
NormalizedAnswer extract_label(const std::string& raw,
                               QuestionType question_type,
                               const std::string& abstain_token,
                               std::size_t window = kDefaultLabelWindow);

// SQuAD answer normalization: lowercase, strip punctuation characters,
// drop the articles a/an/the, collapse whitespace.
std::string normalize_for_f1(const std::string& answer_text);

}  // namespace abstain::postprocess
