#pragma once

#include <cstddef>
#include <string>

#include "abstain/perturb.hpp"
#include "abstain/types.hpp"

namespace abstain::prompts {

enum class Style { constrained, freeform };

std::string to_string(Style style);
Style style_from_string(const std::string& s);

// Which word the prompt tells the model to answer with when unsure.
// "Unanswerable" is the default; "Maybe" is the ablation wording.
struct PromptSpec {
    DatasetKind dataset_kind = DatasetKind::squad2;
    Style style = Style::constrained;
    bool has_context = true;
    std::string abstain_token = "Unanswerable";
};

struct RenderedPrompt {
    std::string text;
    PromptSpec spec;
    std::string record_id;
};

// The template for one (dataset, style, context-presence, abstention-token)
// combination, with {c} and {q} slots left in place. The constrained
// with-context variants are the source templates; no-context variants drop
// the "using (the) following documents" phrase and the Context block;
// freeform variants drop the answer-format constraint sentence.
std::string template_for(const PromptSpec& spec);

// The answer-format constraint sentence that freeform prompts omit,
// exactly as it appears inside the constrained template.
std::string constraint_sentence(DatasetKind kind,
                                const std::string& abstain_token);

inline constexpr std::size_t kDefaultMaxContextWords = 3072;

// Fill the slots: {c} gets the effective context truncated to the first
// max_context_words whitespace-delimited words, {q} gets the question.
// spec.has_context must agree with the instance.
RenderedPrompt render(const perturb::PerturbedInstance& instance,
                      const QARecord& record, const PromptSpec& spec,
                      std::size_t max_context_words = kDefaultMaxContextWords);

// Cut after the Nth whitespace-delimited word, preserving original bytes
// up to that point. Strings with at most N words come back unchanged.
std::string truncate_words(const std::string& text, std::size_t max_words);

}  // namespace abstain::prompts
