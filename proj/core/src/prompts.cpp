#include "abstain/prompts.hpp"

#include <cctype>

#include "abstain/errors.hpp"

namespace abstain::prompts {

namespace {

// Constrained with-context templates, one per dataset, with {abstain},
// {c} and {q} slots. Everything else is derived from these.
struct TemplateParts {
    std::string lead_with_docs;   // first sentence, with the documents phrase
    std::string lead_no_docs;     // first sentence, phrase removed
    std::string constraint;       // answer-format constraint sentence
    std::string abstain_directive;
    bool constraint_before_directive = true;
};

TemplateParts parts_for(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::qasper:
            return {
                "Create an Answer to the Question using following documents.",
                "Create an Answer to the Question.",
                "Pay attention to only answer \"Yes\" or \"No\" for boolean "
                "questions.",
                "Answer \"{abstain}\" when you are not sure about the answer.",
                true,
            };
        case DatasetKind::squad2:
            // SQuAD has no boolean questions; its constraint sentence asks
            // for a concise exact answer and follows the abstention
            // directive. The abstention token is unquoted here.
            return {
                "Create a shortest Answer to the Question using the "
                "following documents.",
                "Create a shortest Answer to the Question.",
                "Please only output the exact answer and keep the answer "
                "concise.",
                "Answer {abstain} when you are not sure about the answer.",
                false,
            };
        case DatasetKind::pubmedqa:
            return {
                "Create an Answer to the Question using following documents.",
                "Create an Answer to the Question.",
                "Pay attention to answer only \"yes\",\"no\" or "
                "\"{abstain}\".",
                "Answer \"{abstain}\" when you are not sure about the answer.",
                true,
            };
        case DatasetKind::bioasq:
            return {
                "Create an Answer to the Question using following documents.",
                "Create an Answer to the Question.",
                "Pay attention to answer only \"yes\" or \"no\".",
                "Answer \"{abstain}\" when you are not sure about the answer.",
                true,
            };
    }
    throw ArgumentError("unknown dataset kind");
}

void replace_all(std::string& text, const std::string& slot,
                 const std::string& value) {
    size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

}  // namespace

std::string to_string(Style style) {
    return style == Style::constrained ? "constrained" : "freeform";
}

Style style_from_string(const std::string& s) {
    if (s == "constrained") return Style::constrained;
    if (s == "freeform") return Style::freeform;
    throw ArgumentError("unknown prompt style: " + s);
}

std::string constraint_sentence(DatasetKind kind,
                                const std::string& abstain_token) {
    std::string sentence = parts_for(kind).constraint;
    replace_all(sentence, "{abstain}", abstain_token);
    return sentence;
}

std::string template_for(const PromptSpec& spec) {
    TemplateParts parts = parts_for(spec.dataset_kind);
    std::string text =
        spec.has_context ? parts.lead_with_docs : parts.lead_no_docs;
    if (spec.style == Style::constrained &&
        parts.constraint_before_directive) {
        text += " " + parts.constraint;
    }
    text += " " + parts.abstain_directive;
    if (spec.style == Style::constrained &&
        !parts.constraint_before_directive) {
        text += " " + parts.constraint;
    }
    if (spec.has_context) {
        text += "\n\nContext: {c}";
    }
    text += "\n\nQuestion: {q}\n\nAnswer:";
    replace_all(text, "{abstain}", spec.abstain_token);
    return text;
}

std::string truncate_words(const std::string& text, std::size_t max_words) {
    std::size_t words = 0;
    bool in_word = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!space && !in_word) {
            in_word = true;
            ++words;
        } else if (space && in_word) {
            in_word = false;
            if (words == max_words) {
                return text.substr(0, i);
            }
        }
    }
    return text;
}

RenderedPrompt render(const perturb::PerturbedInstance& instance,
                      const QARecord& record, const PromptSpec& spec,
                      std::size_t max_context_words) {
    if (spec.has_context != instance.has_context_prompt) {
        throw ArgumentError(
            "prompt spec context presence does not match instance " +
            instance.record_id);
    }
    std::string text = template_for(spec);
    // Splice the slots in one pass so braces inside the question or
    // context are never re-interpreted.
    std::string out;
    out.reserve(text.size() + instance.effective_context.size() +
                record.question.size());
    size_t pos = 0;
    while (pos < text.size()) {
        size_t slot = text.find('{', pos);
        if (slot == std::string::npos || slot + 2 >= text.size() ||
            text[slot + 2] != '}' ||
            (text[slot + 1] != 'c' && text[slot + 1] != 'q')) {
            if (slot == std::string::npos) {
                out.append(text, pos, std::string::npos);
                break;
            }
            out.append(text, pos, slot + 1 - pos);
            pos = slot + 1;
            continue;
        }
        out.append(text, pos, slot - pos);
        if (text[slot + 1] == 'c') {
            out += truncate_words(instance.effective_context,
                                  max_context_words);
        } else {
            out += record.question;
        }
        pos = slot + 3;
    }
    return {std::move(out), spec, record.id};
}

}  // namespace abstain::prompts
