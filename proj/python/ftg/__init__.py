"""Typed feature structure grammars: sort lattices, unification with active
constraints, and a chart parser with direct and generate-and-test modes."""

import json

from ._ftg import (
    EdgeBudgetExceeded,
    FiringBudgetExceeded,
    Grammar,
    GrammarError,
    NodeBudgetExceeded,
    UnknownWord,
    load_grammar,
    load_grammar_file,
    normalize_word,
    sample_grammar,
    sample_grammar_source,
    tokenize,
)

__all__ = [
    "EdgeBudgetExceeded",
    "FiringBudgetExceeded",
    "Grammar",
    "GrammarError",
    "NodeBudgetExceeded",
    "UnknownWord",
    "compare",
    "load_grammar",
    "load_grammar_file",
    "normalize_word",
    "parse",
    "sample_grammar",
    "sample_grammar_source",
    "tokenize",
    "unify",
]


def unify(grammar, a, b, rules=True, avm=False):
    """Unify two terms. Returns the JSON graph as a dict (or AVM text when
    `avm` is set), or None when unification fails."""
    out = grammar._unify(a, b, rules, avm)
    if out is None or avm:
        return out
    return json.loads(out)


def parse(grammar, sentence, mode="direct", max_parses=16, trace=None):
    """Parse one sentence. `trace`, if given, is called with each trace line."""
    return json.loads(grammar._parse(sentence, mode, max_parses, trace))


def compare(grammar, sentence, max_parses=16):
    """Parse in both modes; the result carries `equal_parse_sets`."""
    return json.loads(grammar._compare(sentence, max_parses))


Grammar.unify = unify
Grammar.parse = parse
Grammar.compare = compare
