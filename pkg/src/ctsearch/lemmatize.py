"""Rule-based singularization used when a surface form is unknown.

Corpus lemmas always win; these rules only catch query words that never
occurred in the indexed text. They are heuristics, kept deliberately
small: -ies -> -y, -es after a sibilant -> strip es, plain -s -> strip,
plus a short irregulars table skewed toward mathematical vocabulary.
"""
from __future__ import annotations

IRREGULAR = {
    "indices": "index",
    "matrices": "matrix",
    "vertices": "vertex",
    "simplices": "simplex",
    "apices": "apex",
    "criteria": "criterion",
    "phenomena": "phenomenon",
    "axes": "axis",
    "bases": "basis",
    "analyses": "analysis",
    "children": "child",
    "feet": "foot",
    "geese": "goose",
    "men": "man",
    "mice": "mouse",
    "teeth": "tooth",
    "women": "woman",
    "series": "series",
    "species": "species",
}

_ES_AFTER = ("ches", "shes", "sses", "xes", "zes")
_KEEP_S = ("ss", "us", "is")


def fallback_lemma(word: str) -> str:
    """Guess a lemma for one case-folded word; pass through when unsure."""
    w = word.casefold()
    if w in IRREGULAR:
        return IRREGULAR[w]
    if len(w) > 3 and w.endswith("ies"):
        return w[:-3] + "y"
    if len(w) > 4 and w.endswith(_ES_AFTER):
        return w[:-2]
    if len(w) > 2 and w.endswith("s") and not w.endswith(_KEEP_S):
        return w[:-1]
    return w
