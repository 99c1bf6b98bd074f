"""CONLL-U reading and writing.

The on-disk layout is the usual one: ten tab-separated columns per token
line, `#` comment lines attached to the following sentence, blank lines
between sentences, and `# newdoc id = ...` comments marking document
boundaries. Unmodeled columns (XPOS, FEATS, DEPS, MISC) and unknown
comments are carried through opaquely, so parse -> serialize -> parse is
the identity on the document model.

Malformed input degrades instead of aborting: a token line with the
wrong column count skips its sentence (reported with the line number),
and a non-numeric HEAD flags the token and parses as 0.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import (
    FLAG_NON_NUMERIC_HEAD,
    AnnotatedDocument,
    DocumentMetadata,
    Sentence,
    Token,
    tree_flags,
)

ID, FORM, LEMMA, UPOS, XPOS, FEATS, HEAD, DEPREL, DEPS, MISC = range(10)

_NEWDOC = re.compile(r"^#\s*newdoc\s+id\s*=\s*(.*)$")
_SENT_ID = re.compile(r"^#\s*sent_id\s*=\s*(.*)$")
_TEXT = re.compile(r"^#\s*text\s*=\s*(.*)$")
_BASIC_ID = re.compile(r"^[1-9]\d*$")


@dataclass(frozen=True)
class ParseIssue:
    """One recoverable problem, tied to a 1-based input line number."""

    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


def parse_conllu(
    text: str,
    *,
    default_corpus: str = "",
    issues: list[ParseIssue] | None = None,
) -> list[AnnotatedDocument]:
    """Parse CONLL-U text into annotated documents.

    Documents are delimited by `# newdoc id` comments; input without any
    becomes a single document with an empty doc_id. `issues`, when given,
    collects recoverable problems instead of raising.
    """
    sink = issues if issues is not None else []
    docs: list[tuple[str, list[Sentence]]] = []
    current_doc: tuple[str, list[Sentence]] | None = None

    comments: list[str] = []
    token_lines: list[tuple[int, str]] = []

    def ensure_doc() -> tuple[str, list[Sentence]]:
        nonlocal current_doc
        if current_doc is None:
            current_doc = ("", [])
            docs.append(current_doc)
        return current_doc

    def flush() -> None:
        nonlocal comments, token_lines
        if not comments and not token_lines:
            return
        sentence = _build_sentence(comments, token_lines, sink)
        if sentence is not None:
            ensure_doc()[1].append(sentence)
        comments = []
        token_lines = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            m = _NEWDOC.match(line)
            if m and not token_lines:
                flush()
                current_doc = (m.group(1).strip(), [])
                docs.append(current_doc)
                continue
            comments.append(line)
            continue
        token_lines.append((lineno, line))
    flush()

    out = []
    for doc_id, sentences in docs:
        if not sentences and not doc_id:
            continue
        meta = DocumentMetadata(doc_id=doc_id, corpus=default_corpus)
        out.append(AnnotatedDocument(metadata=meta, sentences=tuple(sentences)))
    return out


def _build_sentence(
    comments: list[str],
    token_lines: list[tuple[int, str]],
    issues: list[ParseIssue],
) -> Sentence | None:
    sent_id = ""
    text_comment: str | None = None
    for c in comments:
        m = _SENT_ID.match(c)
        if m and not sent_id:
            sent_id = m.group(1).strip()
            continue
        m = _TEXT.match(c)
        if m and text_comment is None:
            text_comment = m.group(1)

    tokens: list[Token] = []
    extra_lines: list[tuple[int, str]] = []
    for lineno, line in token_lines:
        cols = line.split("\t")
        if len(cols) != 10:
            issues.append(ParseIssue(lineno, f"expected 10 columns, got {len(cols)}; sentence skipped"))
            return None
        if not _BASIC_ID.match(cols[ID]):
            # Multiword-token ranges and empty nodes ride along opaquely.
            extra_lines.append((len(tokens), line))
            continue
        flags: tuple[str, ...] = ()
        head_col = cols[HEAD]
        try:
            head = int(head_col)
        except ValueError:
            issues.append(ParseIssue(lineno, f"non-numeric head {head_col!r}; token flagged, head set to 0"))
            head = 0
            flags = (FLAG_NON_NUMERIC_HEAD,)
        tokens.append(
            Token(
                index=int(cols[ID]),
                form=cols[FORM],
                lemma=cols[LEMMA],
                upos=cols[UPOS],
                head=head,
                deprel=cols[DEPREL],
                extras=(cols[XPOS], cols[FEATS], cols[DEPS], cols[MISC]),
                flags=flags,
            )
        )

    if not tokens:
        if token_lines:
            issues.append(ParseIssue(token_lines[0][0], "sentence has no basic token lines; skipped"))
        return None

    expected = list(range(1, len(tokens) + 1))
    if [t.index for t in tokens] != expected:
        issues.append(ParseIssue(token_lines[0][0], "token indices not contiguous from 1; sentence skipped"))
        return None

    tok_tuple = tuple(tokens)
    return Sentence(
        tokens=tok_tuple,
        sent_id=sent_id,
        text_comment=text_comment,
        comments=tuple(comments),
        extra_lines=tuple(extra_lines),
        flags=tree_flags(tok_tuple),
    )


def serialize_conllu(docs: list[AnnotatedDocument] | tuple[AnnotatedDocument, ...]) -> str:
    """Serialize documents back to CONLL-U text.

    Stored comments are emitted verbatim; sent_id/text comments are
    synthesized only when absent so round trips stay stable.
    """
    lines: list[str] = []
    for doc in docs:
        if doc.metadata.doc_id:
            lines.append(f"# newdoc id = {doc.metadata.doc_id}")
        for sentence in doc.sentences:
            lines.extend(_sentence_lines(sentence))
            lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


def _sentence_lines(sentence: Sentence) -> list[str]:
    lines = list(sentence.comments)
    have_sent_id = any(_SENT_ID.match(c) for c in lines)
    have_text = any(_TEXT.match(c) for c in lines)
    if sentence.sent_id and not have_sent_id:
        lines.insert(0, f"# sent_id = {sentence.sent_id}")
    if sentence.text_comment is not None and not have_text:
        lines.append(f"# text = {sentence.text_comment}")

    extras = dict_groups(sentence.extra_lines)
    for i, tok in enumerate(sentence.tokens):
        for raw in extras.get(i, ()):
            lines.append(raw)
        xpos, feats, deps, misc = tok.extras
        # A flagged head came in non-numeric; emit the standard "_" so
        # the flag survives another parse.
        head_str = "_" if FLAG_NON_NUMERIC_HEAD in tok.flags else str(tok.head)
        lines.append(
            "\t".join(
                (
                    str(tok.index),
                    tok.form,
                    tok.lemma,
                    tok.upos,
                    xpos,
                    feats,
                    head_str,
                    tok.deprel,
                    deps,
                    misc,
                )
            )
        )
    for raw in extras.get(len(sentence.tokens), ()):
        lines.append(raw)
    return lines


def dict_groups(extra_lines: tuple[tuple[int, str], ...]) -> dict[int, list[str]]:
    groups: dict[int, list[str]] = {}
    for pos, raw in extra_lines:
        groups.setdefault(pos, []).append(raw)
    return groups


def read_conllu_file(path, **kwargs) -> list[AnnotatedDocument]:
    from pathlib import Path

    return parse_conllu(Path(path).read_text(encoding="utf-8"), **kwargs)
