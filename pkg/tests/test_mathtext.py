"""Math verbalization goldens plus the no-TeX-leakage guarantee."""
from __future__ import annotations

import random

import pytest

from ctsearch.corpus import MathFragment
from ctsearch.mathtext import find_math_fragments, replace_math, verbalize_math

# (fragment, expected). Derived by hand from the rule table.
GOLDENS = [
    ("C", "C"),
    ("\\alpha", "alpha"),
    ("42", "42"),
    ("0 \\leq m", "0 less than or equal to m"),
    ("T([m],[0])", "the expression T of bracket m comma bracket 0"),
    ("\\mathbf{Cat}", "Cat"),
    ("f \\circ g", "f composed with g"),
    ("X \\times Y \\longrightarrow Z", "X times Y to Z"),
    ("A^2", "A to the 2"),
    ("x = y", "x equals y"),
    ("x_0", "x sub 0"),
    ("C'", "C prime"),
    ("(a,b)", "a comma b"),
    ("F(x)", "the expression F of x"),
    ("F()", "the expression F"),
    ("\\nabla f", "the expression f"),
    ("\\,", "the expression"),
    ("$x = y$", "x equals y"),
]


@pytest.mark.parametrize("fragment,expected", GOLDENS)
def test_verbalization_goldens(fragment, expected):
    assert verbalize_math(fragment) == expected


def test_accepts_fragment_objects():
    frag = MathFragment(raw="0 \\leq m", start=4, end=14)
    assert verbalize_math(frag) == "0 less than or equal to m"


_POOL = [
    "\\leq", "\\geq", "\\to", "\\mapsto", "\\times", "\\otimes", "\\infty",
    "\\alpha", "\\Omega", "\\nabla", "\\mathcal", "\\left(", "\\right)",
    "X", "y", "Cat", "12", "3.5", "(", ")", "[", "]", "{", "}",
    "^", "_", "=", "+", "-", "/", "'", "!", "|", ":", ",", ";", "$", "\\\\",
]


def test_output_never_leaks_tex():
    rng = random.Random(77)
    for _ in range(400):
        raw = " ".join(rng.choice(_POOL) for _ in range(rng.randint(1, 12)))
        spoken = verbalize_math(raw)
        assert spoken
        assert verbalize_math(raw) == spoken
        for forbidden in ("\\", "{", "}", "$"):
            assert forbidden not in spoken, (raw, spoken)


def test_find_math_fragments_spans():
    text = "A $x$ and \\(0 \\leq m\\) here"
    frags = find_math_fragments(text)
    assert [f.raw for f in frags] == ["x", "0 \\leq m"]
    for frag in frags:
        assert text[frag.start:frag.end] in ("$x$", "\\(0 \\leq m\\)")


def test_find_math_skips_blank_fragments():
    assert find_math_fragments("cost is $ $ exactly") == []
    assert find_math_fragments("no math here") == []


def test_replace_math_splices_in_place():
    text = "Let $0 \\leq m$ hold."
    assert replace_math(text) == "Let 0 less than or equal to m hold."
    plain = "Nothing mathematical."
    assert replace_math(plain) is plain


def test_replace_math_preserves_surrounding_text():
    text = "pre $a$ mid \\(b\\) post"
    assert replace_math(text) == "pre a mid b post"
