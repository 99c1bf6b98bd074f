"""Deterministic verbalization of math fragments into plain text.

The downstream annotation tooling works on prose, so inline formulas are
replaced by spoken-style phrases before anything else sees the text. The
grammar is a small rule table, not a parser: single identifiers pass
through, known operators map to words, function application becomes
"the expression F of ...", and anything else falls back to a letter-only
transliteration. Output never contains TeX control characters.
"""
from __future__ import annotations

import re

from .corpus import MathFragment

# Operator and delimiter vocabulary. Keys are single symbols or TeX
# control words (without backslash); values are the spoken words, empty
# string meaning "drop silently".
WORDS: dict[str, str] = {
    "leq": "less than or equal to",
    "le": "less than or equal to",
    "geq": "greater than or equal to",
    "ge": "greater than or equal to",
    "neq": "not equal to",
    "ne": "not equal to",
    "to": "to",
    "rightarrow": "to",
    "longrightarrow": "to",
    "mapsto": "maps to",
    "times": "times",
    "cdot": "times",
    "in": "in",
    "subseteq": "contained in",
    "subset": "contained in",
    "cup": "union",
    "cap": "intersection",
    "circ": "composed with",
    "otimes": "tensor",
    "oplus": "direct sum",
    "cong": "isomorphic to",
    "simeq": "equivalent to",
    "sim": "similar to",
    "infty": "infinity",
    "=": "equals",
    "<": "less than",
    ">": "greater than",
    "≤": "less than or equal to",
    "≥": "greater than or equal to",
    "≠": "not equal to",
    "→": "to",
    "×": "times",
    "∈": "in",
    "⊆": "contained in",
    "∘": "composed with",
    "⊗": "tensor",
    "≅": "isomorphic to",
    "+": "plus",
    "-": "minus",
    "−": "minus",
    "/": "over",
    "*": "times",
    "^": "to the",
    "_": "sub",
    ",": "comma",
    ";": "comma",
    ":": "such that",
    "|": "such that",
    "[": "bracket",
    "]": "",
    "(": "",
    ")": "",
    "{": "",
    "}": "",
    "'": "prime",
    "!": "",
    ".": "",
}

# Greek-letter control words read as their own names.
_GREEK = frozenset({
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma",
    "tau", "upsilon", "phi", "chi", "psi", "omega",
    "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon",
    "Phi", "Psi", "Omega",
})

# Control words that only tune layout and carry no content.
_SILENT_COMMANDS = frozenset({
    "left", "right", "big", "bigl", "bigr", "quad", "qquad", "displaystyle",
    "mathrm", "mathbf", "mathit", "mathcal", "mathbb", "mathsf", "operatorname",
    "text", "textrm", "textit", "textbf", ",", ";", " ",
})

_TOKEN = re.compile(
    r"""\\(?P<cmd>[a-zA-Z]+|.)   # control word or control symbol
      | (?P<word>[A-Za-z]+)
      | (?P<num>\d+(?:\.\d+)?)
      | (?P<sym>\S)
    """,
    re.VERBOSE,
)

_DOLLARS = re.compile(r"^\$+|\$+$")

_INLINE_MATH = re.compile(r"\$([^$\n]+)\$|\\\((.+?)\\\)")


class _Tok:
    __slots__ = ("kind", "text")

    def __init__(self, kind: str, text: str) -> None:
        self.kind = kind  # "atom" | "cmd" | "sym"
        self.text = text


def _tokenize(raw: str) -> list[_Tok]:
    src = _DOLLARS.sub("", raw.strip())
    out: list[_Tok] = []
    for m in _TOKEN.finditer(src):
        if m.group("cmd") is not None:
            name = m.group("cmd")
            if name in _SILENT_COMMANDS:
                continue
            kind = "atom" if name in _GREEK else "cmd"
            out.append(_Tok(kind, name))
        elif m.group("word") is not None:
            out.append(_Tok("atom", m.group("word")))
        elif m.group("num") is not None:
            out.append(_Tok("atom", m.group("num")))
        else:
            out.append(_Tok("sym", m.group("sym")))
    return out


def _word_for(tok: _Tok) -> str | None:
    """Spoken word for one token, '' to drop, None when unmapped."""
    if tok.kind == "atom":
        return tok.text
    return WORDS.get(tok.text)


def _word_sequence(tokens: list[_Tok]) -> str | None:
    words: list[str] = []
    for tok in tokens:
        word = _word_for(tok)
        if word is None:
            return None
        if word:
            words.append(word)
    return " ".join(words) if words else None


def _application(tokens: list[_Tok]) -> tuple[str, list[_Tok]] | None:
    # F(...) covering the whole fragment, parens balanced.
    if len(tokens) < 3 or tokens[0].kind != "atom":
        return None
    if tokens[1].text != "(" or tokens[-1].text != ")":
        return None
    depth = 0
    for i, tok in enumerate(tokens[1:], start=1):
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
            if depth == 0 and i != len(tokens) - 1:
                return None
    if depth != 0:
        return None
    return tokens[0].text, tokens[2:-1]


def _fallback(tokens: list[_Tok]) -> str:
    letters = [t.text for t in tokens if t.kind == "atom" and t.text.isalpha()]
    if letters:
        return "the expression " + " ".join(letters)
    return "the expression"


def verbalize_math(fragment: MathFragment | str) -> str:
    """Render one math fragment as plain words.

    Deterministic and total; the result is non-empty and free of
    backslashes, braces, and dollar signs.
    """
    raw = fragment.raw if isinstance(fragment, MathFragment) else fragment
    tokens = _tokenize(raw)
    if not tokens:
        return "the expression"
    if len(tokens) == 1 and tokens[0].kind == "atom":
        return tokens[0].text
    app = _application(tokens)
    if app is not None:
        head, args = app
        inner = _word_sequence(args)
        if inner:
            return f"the expression {head} of {inner}"
        return f"the expression {head}"
    words = _word_sequence(tokens)
    if words is not None:
        return words
    return _fallback(tokens)


def find_math_fragments(text: str) -> list[MathFragment]:
    """Locate inline $...$ and \\(...\\) spans."""
    out = []
    for m in _INLINE_MATH.finditer(text):
        raw = m.group(1) if m.group(1) is not None else m.group(2)
        if raw and raw.strip():
            out.append(MathFragment(raw=raw, start=m.start(), end=m.end()))
    return out


def replace_math(text: str) -> str:
    """Replace every inline math span in `text` with its verbalization."""
    fragments = find_math_fragments(text)
    if not fragments:
        return text
    parts: list[str] = []
    cursor = 0
    for frag in fragments:
        parts.append(text[cursor:frag.start])
        parts.append(verbalize_math(frag))
        cursor = frag.end
    parts.append(text[cursor:])
    return "".join(parts)
