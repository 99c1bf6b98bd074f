"""Best-effort Markdown stripping for wiki-style corpus pages."""
from __future__ import annotations

import re

_FENCE = re.compile(r"^(?:```|~~~).*$\n?", re.MULTILINE)
_ATX_HEADING = re.compile(r"^ {0,3}#{1,6}[ \t]+", re.MULTILINE)
_ATX_TRAILER = re.compile(r"[ \t]+#+[ \t]*$", re.MULTILINE)
_SETEXT_OR_RULE = re.compile(r"^ {0,3}(?:=+|(?:[-*_][ \t]*){3,}|-+)[ \t]*$\n?", re.MULTILINE)
_BLOCKQUOTE = re.compile(r"^ {0,3}>[ \t]?", re.MULTILINE)
_LIST_MARKER = re.compile(r"^[ \t]*(?:[-*+]|\d{1,3}[.)])[ \t]+", re.MULTILINE)
_IMAGE = re.compile(r"!\[([^\]]*)\]\([^)]*\)")
_LINK = re.compile(r"\[([^\]]+)\]\([^)]*\)")
_REF_LINK = re.compile(r"\[([^\]]+)\]\[[^\]]*\]")
_REF_DEF = re.compile(r"^ {0,3}\[[^\]]+\]:[ \t]*\S.*$\n?", re.MULTILINE)
_WIKI_LINK = re.compile(r"\[\[([^\]|]*)\|([^\]]*)\]\]|\[\[([^\]]+)\]\]")
_CODE_SPAN = re.compile(r"`([^`\n]*)`")
_STRONG_EM = re.compile(r"(\*{1,3})(?=\S)(.+?)(?<=\S)\1")
_UNDERSCORE_EM = re.compile(r"(?<![\w\\])(_{1,3})(?=\S)(.+?)(?<=\S)\1(?!\w)")
_MANY_BLANKS = re.compile(r"\n{3,}")
_TRAILING_WS = re.compile(r"[ \t]+$", re.MULTILINE)


def _wiki_repl(m: re.Match) -> str:
    if m.group(3) is not None:
        return m.group(3)
    return m.group(2)


def _strip_once(text: str) -> str:
    text = _FENCE.sub("", text)
    text = _REF_DEF.sub("", text)
    text = _SETEXT_OR_RULE.sub("", text)
    text = _ATX_HEADING.sub("", text)
    text = _ATX_TRAILER.sub("", text)
    text = _BLOCKQUOTE.sub("", text)
    text = _LIST_MARKER.sub("", text)
    text = _IMAGE.sub(r"\1", text)
    text = _WIKI_LINK.sub(_wiki_repl, text)
    text = _LINK.sub(r"\1", text)
    text = _REF_LINK.sub(r"\1", text)
    text = _CODE_SPAN.sub(r"\1", text)
    text = _STRONG_EM.sub(r"\2", text)
    text = _UNDERSCORE_EM.sub(r"\2", text)
    text = _TRAILING_WS.sub("", text)
    text = _MANY_BLANKS.sub("\n\n", text)
    return text.strip()


def strip_markdown(text: str) -> str:
    """Strip Markdown markup, keeping plain text and paragraph breaks.

    Total and idempotent: every rule only deletes characters, and the
    rules are applied until a fixed point is reached. Each changed pass
    strictly shrinks the text, so the loop terminates.
    """
    current = text
    for _ in range(len(text) + 2):
        stripped = _strip_once(current)
        if stripped == current:
            break
        current = stripped
    return current
