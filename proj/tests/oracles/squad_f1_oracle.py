#!/usr/bin/env python3
"""Standalone oracle for answer normalization and token F1.

Reimplements the SQuAD-v2 evaluation conventions (normalize_answer +
compute_f1, max over references) independently of the C++ code under
test. Run it to regenerate fixtures/f1/f1_oracle_cases.json; the
acceptance suite compares the library against the frozen output.
"""

import collections
import json
import os
import re
import string
import sys


def normalize_answer(s):
    def remove_articles(text):
        return re.sub(r"\b(a|an|the)\b", " ", text)

    def white_space_fix(text):
        return " ".join(text.split())

    def remove_punc(text):
        exclude = set(string.punctuation)
        return "".join(ch for ch in text if ch not in exclude)

    def lower(text):
        return text.lower()

    return white_space_fix(remove_articles(remove_punc(lower(s))))


def get_tokens(s):
    if not s:
        return []
    return normalize_answer(s).split()


def compute_f1(a_gold, a_pred):
    gold_toks = get_tokens(a_gold)
    pred_toks = get_tokens(a_pred)
    common = collections.Counter(gold_toks) & collections.Counter(pred_toks)
    num_same = sum(common.values())
    if len(gold_toks) == 0 or len(pred_toks) == 0:
        # If either is no-answer, F1 is 1 if they agree, 0 otherwise.
        return float(gold_toks == pred_toks)
    if num_same == 0:
        return 0.0
    precision = 1.0 * num_same / len(pred_toks)
    recall = 1.0 * num_same / len(gold_toks)
    return (2 * precision * recall) / (precision + recall)


def max_f1(prediction, references):
    return max(compute_f1(ref, prediction) for ref in references)


CASES = [
    # identity / basic overlap
    ("rhine falls", ["rhine falls"]),
    ("lake constance", ["lake geneva"]),
    ("Lake Constance", ["The Lake Constance."]),
    ("Holyrood in 2004", ["holyrood in 2004"]),
    ("Hollywood", ["Holyrood"]),
    ("the quick brown fox", ["quick brown fox"]),
    ("a cat", ["the cat"]),
    ("an apple a day", ["apple day"]),
    # articles only
    ("a, an, the", ["something"]),
    ("the", ["the answer"]),
    ("a the an", ["a the an"]),
    # punctuation
    ("U.S.A.", ["USA"]),
    ("don't stop", ["dont stop"]),
    ("high-quality results", ["highquality results"]),
    ("hello, world!", ["hello world"]),
    ("(see figure 3)", ["see figure 3"]),
    ("answer: 42", ["42 answer"]),
    ("semi-colon; test", ["semicolon test"]),
    ('"quoted answer"', ["quoted answer"]),
    ("ellipsis...", ["ellipsis"]),
    # casing
    ("BiDirectional LSTM", ["bidirectional lstm"]),
    ("YES", ["yes"]),
    ("No", ["no"]),
    ("MiXeD CaSe ToKeNs", ["mixed case tokens extra"]),
    # empty strings
    ("", [""]),
    ("", ["nonempty"]),
    ("nonempty", [""]),
    ("   ", ["   "]),
    ("...", ["..."]),
    ("the a an", [""]),
    ("", ["the a an"]),
    # partial overlap with repeats (multiset semantics)
    ("word word word", ["word"]),
    ("word", ["word word word"]),
    ("b a b a", ["a b"]),
    ("x y z", ["z y x"]),
    ("one two three four", ["three four five six"]),
    ("alpha beta", ["beta gamma delta"]),
    # numbers and units
    ("1873", ["in 1873"]),
    ("33%", ["33"]),
    ("3,096 tokens", ["3096 tokens"]),
    ("256", ["max 256 new tokens"]),
    # longer, messier strings
    (
        "The model uses a bidirectional LSTM encoder.",
        ["a bidirectional LSTM encoder", "BiLSTM encoder"],
    ),
    (
        "They evaluate on four QA datasets in total",
        ["four QA datasets", "4 datasets"],
    ),
    (
        "It was demolished following the move to Holyrood in 2004.",
        ["Holyrood in 2004"],
    ),
    (
        "coaches were less convinced (33%)",
        ["the coaches were less convinced"],
    ),
    # multi-reference: max over references
    ("lake constance", ["lake geneva", "lake constance"]),
    ("rhine", ["the rhine falls", "rhine emerges from lake constance"]),
    ("yes", ["yes", "no"]),
    ("no", ["yes", "no"]),
    ("unanswerable", ["unanswerable"]),
    ("maybe", ["yes", "no", "maybe"]),
    ("bidirectional lstm", ["LSTM", "Bidirectional LSTM", "Tree LSTM"]),
    ("tree lstm yields better results", ["simple Tree LSTM", "Tree-LSTM"]),
    # whitespace handling
    ("  spaced   out  ", ["spaced out"]),
    ("tab\tseparated tokens", ["tab separated tokens"]),
    ("newline\nseparated", ["newline separated"]),
    ("word", ["word "]),
]


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "..", "fixtures", "f1",
        "f1_oracle_cases.json")
    cases = []
    for prediction, references in CASES:
        cases.append({
            "prediction": prediction,
            "references": references,
            "normalized_prediction": normalize_answer(prediction),
            "f1": max_f1(prediction, references),
        })
    with open(out_path, "w", encoding="utf-8") as f:
        json.dump({"cases": cases}, f, indent=1, ensure_ascii=False)
        f.write("\n")
    print(f"wrote {len(cases)} cases to {out_path}")


if __name__ == "__main__":
    main()
