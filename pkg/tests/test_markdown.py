"""Markdown stripping: marker removal plus the idempotence guarantee."""
from __future__ import annotations

import random

from ctsearch.markdown import strip_markdown


def test_headings_and_emphasis():
    src = "## Idea ##\n\nA **double category** is a *category* internal to ___Cat___.\n"
    assert strip_markdown(src) == "Idea\n\nA double category is a category internal to Cat."


def test_wiki_links_keep_visible_label():
    assert strip_markdown("see [[double category]]") == "see double category"
    assert strip_markdown("many [[monad|monads]] exist") == "many monads exist"


def test_inline_links_and_images():
    assert strip_markdown("the [Cat](/nlab/show/Cat) entry") == "the Cat entry"
    assert strip_markdown("![diagram](fig1.png) shows") == "diagram shows"
    assert strip_markdown("see [spans][1]\n\n[1]: http://example.org") == "see spans"


def test_lists_blockquotes_and_fences():
    src = "\n".join([
        "> quoted line",
        "- first item",
        "2. second item",
        "```python",
        "code stays, fence goes",
        "```",
        "",
        "tail",
    ])
    assert strip_markdown(src) == "\n".join([
        "quoted line",
        "first item",
        "second item",
        "code stays, fence goes",
        "",
        "tail",
    ])


def test_code_spans_and_rules():
    assert strip_markdown("use `Cat` here") == "use Cat here"
    assert strip_markdown("Title\n=====\nbody\n\n---\n") == "Title\nbody"


def test_nested_markup_needs_more_than_one_pass():
    # The outer emphasis only becomes strippable once the link collapses.
    src = "**[bold link](x)**"
    assert strip_markdown(src) == "bold link"


def test_plain_text_unchanged():
    text = "Double categories were introduced by Ehresmann."
    assert strip_markdown(text) == text


_PIECES = [
    "word", "Cat", "category", " ", "\n", "\n\n", "# ", "## ", "**", "*", "_",
    "`", "```", "- ", "1. ", "> ", "[", "]", "(", ")", "[[", "]]", "|",
    "![", "---\n", "====\n", "  ", "\t",
]


def test_idempotent_on_random_soup():
    rng = random.Random(91)
    for _ in range(300):
        soup = "".join(rng.choice(_PIECES) for _ in range(rng.randint(0, 40)))
        once = strip_markdown(soup)
        assert strip_markdown(once) == once


def test_never_grows():
    rng = random.Random(92)
    for _ in range(300):
        soup = "".join(rng.choice(_PIECES) for _ in range(rng.randint(0, 40)))
        assert len(strip_markdown(soup)) <= len(soup)


def test_idempotent_on_bundled_raw_pages():
    from support import SAMPLE_RAW

    for page in sorted((SAMPLE_RAW / "nlab").glob("*.md")):
        once = strip_markdown(page.read_text(encoding="utf-8"))
        assert strip_markdown(once) == once
