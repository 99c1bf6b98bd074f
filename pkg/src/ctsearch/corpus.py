"""Document model shared by every stage of the pipeline.

A corpus is a set of annotated documents. Each document carries metadata
(from a JSONL manifest) and a list of sentences; each sentence carries
tokens with lemma, part-of-speech, and dependency annotations. Malformed
annotations are flagged on the token or sentence, never silently dropped.
"""
from __future__ import annotations

import datetime
from dataclasses import dataclass, field, replace

TAC = "tac"
NLAB = "nlab"

DEFAULT_CORPORA: dict[str, str] = {
    TAC: "Theory and Applications of Categories",
    NLAB: "nLab",
}

# Token/sentence flag labels. Flags mark suspect machine annotations.
FLAG_NON_NUMERIC_HEAD = "non-numeric-head"
FLAG_NO_ROOT = "tree:no-root"
FLAG_MULTIPLE_ROOTS = "tree:multiple-roots"
FLAG_HEAD_OUT_OF_RANGE = "tree:head-out-of-range"
FLAG_SELF_HEAD = "tree:self-head"


class CorpusRegistryError(ValueError):
    pass


class CorpusRegistry:
    """Known corpus identifiers and their display names."""

    def __init__(self, initial: dict[str, str] | None = None) -> None:
        self._names: dict[str, str] = {}
        for corpus_id, name in (initial or DEFAULT_CORPORA).items():
            self.register(corpus_id, name)

    def register(self, corpus_id: str, display_name: str) -> None:
        key = normalize_corpus_id(corpus_id)
        if not key:
            raise CorpusRegistryError("corpus id must be non-empty")
        if not display_name.strip():
            raise CorpusRegistryError(f"corpus {key!r} needs a display name")
        if key in self._names and self._names[key] != display_name:
            raise CorpusRegistryError(f"corpus {key!r} already registered")
        self._names[key] = display_name

    def display_name(self, corpus_id: str) -> str:
        return self._names[normalize_corpus_id(corpus_id)]

    def __contains__(self, corpus_id: str) -> bool:
        return normalize_corpus_id(corpus_id) in self._names

    def __iter__(self):
        return iter(self._names)

    def as_dict(self) -> dict[str, str]:
        return dict(self._names)


def normalize_corpus_id(corpus_id: str) -> str:
    return corpus_id.strip().casefold()


@dataclass(frozen=True)
class DocumentMetadata:
    """One manifest row. `tags` may mark meta pages (book/person/meta)."""

    doc_id: str
    corpus: str
    title: str = ""
    authors: tuple[str, ...] = ()
    date: datetime.date | None = None
    keywords: tuple[str, ...] = ()
    source_url: str | None = None
    tags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        row: dict = {"doc_id": self.doc_id, "corpus": self.corpus, "title": self.title}
        if self.authors:
            row["authors"] = list(self.authors)
        if self.date is not None:
            row["date"] = self.date.isoformat()
        if self.keywords:
            row["keywords"] = list(self.keywords)
        if self.source_url:
            row["source_url"] = self.source_url
        if self.tags:
            row["tags"] = list(self.tags)
        return row

    @classmethod
    def from_json(cls, row: dict) -> "DocumentMetadata":
        date = row.get("date")
        return cls(
            doc_id=str(row["doc_id"]),
            corpus=normalize_corpus_id(str(row.get("corpus", ""))),
            title=str(row.get("title", "")),
            authors=tuple(row.get("authors", ())),
            date=datetime.date.fromisoformat(date) if date else None,
            keywords=tuple(row.get("keywords", ())),
            source_url=row.get("source_url"),
            tags=tuple(row.get("tags", ())),
        )


@dataclass(frozen=True)
class Token:
    """One CONLL-U token line.

    `index` is 1-based within the sentence; `head` is 0 for the root.
    `extras` preserves the XPOS/FEATS/DEPS/MISC columns opaquely so a
    parse/serialize cycle loses nothing.
    """

    index: int
    form: str
    lemma: str
    upos: str
    head: int = 0
    deprel: str = "_"
    extras: tuple[str, str, str, str] = ("_", "_", "_", "_")
    flags: tuple[str, ...] = ()

    def problems(self, sentence_length: int) -> list[str]:
        out = []
        if self.index < 1:
            out.append("index<1")
        if not self.form:
            out.append("empty form")
        if not self.lemma:
            out.append("empty lemma")
        if self.head < 0 or self.head > sentence_length:
            out.append("head out of range")
        if self.head == self.index:
            out.append("self head")
        return out


@dataclass(frozen=True)
class Sentence:
    """A sentence: contiguous tokens plus preserved comment lines.

    `comments` holds the raw `#` lines verbatim (including sent_id/text
    lines when the source had them). `text_comment` is the value of the
    `# text` comment when one exists; the `text` property falls back to
    reconstruction from token forms. `extra_lines` holds non-basic node
    lines (multiword ranges, empty nodes) as (position, raw) pairs where
    position counts basic tokens already seen; they are re-emitted in
    place on serialization.
    """

    tokens: tuple[Token, ...]
    sent_id: str = ""
    text_comment: str | None = None
    comments: tuple[str, ...] = ()
    extra_lines: tuple[tuple[int, str], ...] = ()
    flags: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        if self.text_comment is not None:
            return self.text_comment
        return reconstruct_text(self.tokens)

    def with_flags(self, flags: tuple[str, ...]) -> "Sentence":
        return replace(self, flags=flags)


def reconstruct_text(tokens: tuple[Token, ...]) -> str:
    """Join token forms, honoring SpaceAfter=No in the MISC column."""
    parts: list[str] = []
    for tok in tokens:
        parts.append(tok.form)
        misc = tok.extras[3]
        if "SpaceAfter=No" not in misc:
            parts.append(" ")
    if parts and parts[-1] == " ":
        parts.pop()
    return "".join(parts)


def tree_flags(tokens: tuple[Token, ...]) -> tuple[str, ...]:
    """Dependency-tree sanity flags. Flag, never reject."""
    n = len(tokens)
    flags: list[str] = []
    roots = sum(1 for t in tokens if t.head == 0)
    if roots == 0:
        flags.append(FLAG_NO_ROOT)
    elif roots > 1:
        flags.append(FLAG_MULTIPLE_ROOTS)
    if any(t.head < 0 or t.head > n for t in tokens):
        flags.append(FLAG_HEAD_OUT_OF_RANGE)
    if any(t.head == t.index for t in tokens):
        flags.append(FLAG_SELF_HEAD)
    return tuple(flags)


@dataclass(frozen=True)
class AnnotatedDocument:
    metadata: DocumentMetadata
    sentences: tuple[Sentence, ...] = ()

    @property
    def doc_id(self) -> str:
        return self.metadata.doc_id

    @property
    def corpus(self) -> str:
        return self.metadata.corpus

    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)


@dataclass(frozen=True)
class MathFragment:
    """An extracted math span: raw source plus [start, end) in its host."""

    raw: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if not self.raw:
            raise ValueError("math fragment must be non-empty")
        if self.start < 0 or self.end <= self.start:
            raise ValueError("math fragment span must be a non-empty range")
