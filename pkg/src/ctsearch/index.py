"""Lemma-level inverted index with versioned on-disk persistence.

A posting addresses one token: (corpus, doc_id, sentence ordinal, token
position), both counters 0-based. The sentence store keeps everything
needed to render results without the original files: sentence text,
per-token character offsets, lemmas, and POS tags, plus the document
metadata. See docs/index-format.md for the file layout.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import os
import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import DEFAULT_CORPORA, AnnotatedDocument, DocumentMetadata

MAGIC = b"CTSIDX\x00\x00"
FORMAT_VERSION = 1

_HEADER = struct.Struct(">8sHI")  # magic, version, manifest length


class IndexingError(Exception):
    """Base for index build/load failures."""


class DuplicateDocIdError(IndexingError):
    def __init__(self, offenders: list[tuple[str, str]]) -> None:
        self.offenders = offenders
        listed = ", ".join(f"{c}:{d}" for c, d in offenders)
        super().__init__(f"duplicate document ids: {listed}")


class CorruptFileError(IndexingError):
    pass


class VersionMismatchError(IndexingError):
    def __init__(self, found: int, supported: int = FORMAT_VERSION) -> None:
        self.found = found
        super().__init__(f"index format version {found}, this build reads {supported}")


class ChecksumMismatchError(IndexingError):
    pass


@dataclass(frozen=True, order=True)
class Posting:
    corpus: str
    doc_id: str
    sentence_ordinal: int
    token_position: int


@dataclass(frozen=True)
class StoredSentence:
    """Render-ready sentence: text plus aligned per-token columns."""

    text: str
    offsets: tuple[tuple[int, int], ...]
    lemmas: tuple[str, ...]
    upos: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.lemmas)


class SentenceStore:
    """Sentences and document metadata addressed the same way postings are."""

    def __init__(self) -> None:
        self._sentences: dict[tuple[str, str, int], StoredSentence] = {}
        self._documents: dict[tuple[str, str], DocumentMetadata] = {}
        self.corpora: dict[str, str] = {}

    def add_document(self, meta: DocumentMetadata) -> None:
        self._documents[(meta.corpus, meta.doc_id)] = meta
        if meta.corpus not in self.corpora:
            self.corpora[meta.corpus] = DEFAULT_CORPORA.get(meta.corpus, meta.corpus)

    def add_sentence(self, corpus: str, doc_id: str, ordinal: int, sentence: StoredSentence) -> None:
        self._sentences[(corpus, doc_id, ordinal)] = sentence

    def sentence(self, corpus: str, doc_id: str, ordinal: int) -> StoredSentence:
        return self._sentences[(corpus, doc_id, ordinal)]

    def document(self, corpus: str, doc_id: str) -> DocumentMetadata:
        return self._documents[(corpus, doc_id)]

    def documents(self) -> list[DocumentMetadata]:
        return [self._documents[k] for k in sorted(self._documents)]

    def sentence_keys(self) -> list[tuple[str, str, int]]:
        return sorted(self._sentences)

    def token_count(self) -> int:
        return sum(len(s) for s in self._sentences.values())

    def document_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {c: 0 for c in self.corpora}
        for corpus, _ in self._documents:
            counts[corpus] = counts.get(corpus, 0) + 1
        return counts


class LemmaIndex:
    """Case-folded lemma -> sorted postings, plus the surface-form table."""

    def __init__(self) -> None:
        self.postings: dict[str, tuple[Posting, ...]] = {}
        self.surface_to_lemma: dict[str, str] = {}
        self.manifest: dict = {}

    def lookup(self, lemma: str) -> tuple[Posting, ...]:
        """Postings for one lemma; unknown lemmas yield an empty tuple."""
        return self.postings.get(lemma.casefold(), ())

    def lemma_count(self) -> int:
        return len(self.postings)

    def posting_count(self) -> int:
        return sum(len(p) for p in self.postings.values())


def _align_offsets(text: str, forms: tuple[str, ...]) -> tuple[tuple[int, int], ...] | None:
    """Locate each form in `text`, left to right. None when it cannot."""
    offsets = []
    cursor = 0
    for form in forms:
        at = text.find(form, cursor)
        if at < 0:
            return None
        offsets.append((at, at + len(form)))
        cursor = at + len(form)
    return tuple(offsets)


def build_index(documents: list[AnnotatedDocument]) -> tuple[LemmaIndex, SentenceStore]:
    """Index every token of every document.

    Duplicate (corpus, doc_id) pairs abort with the full offender list.
    Every token lands in exactly one posting list; punctuation is indexed
    like anything else and only skipped later, at phrase-match time.
    """
    seen: set[tuple[str, str]] = set()
    offenders: list[tuple[str, str]] = []
    for doc in documents:
        key = (doc.corpus, doc.doc_id)
        if key in seen:
            offenders.append(key)
        seen.add(key)
    if offenders:
        raise DuplicateDocIdError(sorted(set(offenders)))

    store = SentenceStore()
    raw_postings: dict[str, list[Posting]] = {}
    surface_counts: dict[str, Counter] = {}

    for doc in documents:
        store.add_document(doc.metadata)
        for ordinal, sentence in enumerate(doc.sentences):
            forms = tuple(t.form for t in sentence.tokens)
            text = sentence.text
            offsets = _align_offsets(text, forms)
            if offsets is None:
                # The # text comment disagrees with the token forms; fall
                # back to a reconstruction that aligns by construction.
                text = " ".join(forms)
                offsets = _align_offsets(text, forms)
                assert offsets is not None
            lemmas = tuple(t.lemma for t in sentence.tokens)
            upos = tuple(t.upos for t in sentence.tokens)
            store.add_sentence(
                doc.corpus,
                doc.doc_id,
                ordinal,
                StoredSentence(text=text, offsets=offsets, lemmas=lemmas, upos=upos),
            )
            for position, token in enumerate(sentence.tokens):
                posting = Posting(doc.corpus, doc.doc_id, ordinal, position)
                raw_postings.setdefault(token.lemma.casefold(), []).append(posting)
                surface_counts.setdefault(token.form.casefold(), Counter())[token.lemma.casefold()] += 1

    index = LemmaIndex()
    index.postings = {lemma: tuple(sorted(plist)) for lemma, plist in raw_postings.items()}
    # Most frequent lemma wins; ties break lexicographically.
    index.surface_to_lemma = {
        surface: min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        for surface, counts in surface_counts.items()
    }
    index.manifest = {
        "format_version": FORMAT_VERSION,
        "corpora": dict(store.corpora),
        "document_counts": store.document_counts(),
        "token_count": store.token_count(),
        "lemma_count": index.lemma_count(),
        "corpus_checksums": _corpus_checksums(store),
    }
    return index, store


def _corpus_checksums(store: SentenceStore) -> dict[str, str]:
    """Checksum of each corpus's stored content, for drift detection."""
    per_corpus: dict[str, hashlib._Hash] = {}
    for key in store.sentence_keys():
        corpus = key[0]
        h = per_corpus.setdefault(corpus, hashlib.sha256())
        sent = store.sentence(*key)
        h.update(
            json.dumps(
                [key[1], key[2], sent.text, list(sent.lemmas), list(sent.upos)],
                ensure_ascii=False,
                sort_keys=True,
            ).encode("utf-8")
        )
    return {corpus: h.hexdigest() for corpus, h in sorted(per_corpus.items())}


# --- persistence ----------------------------------------------------------

def _payload_dict(index: LemmaIndex, store: SentenceStore) -> dict:
    sentences = []
    for corpus, doc_id, ordinal in store.sentence_keys():
        sent = store.sentence(corpus, doc_id, ordinal)
        sentences.append(
            [corpus, doc_id, ordinal, sent.text,
             [list(o) for o in sent.offsets], list(sent.lemmas), list(sent.upos)]
        )
    return {
        "postings": {
            lemma: [[p.corpus, p.doc_id, p.sentence_ordinal, p.token_position] for p in plist]
            for lemma, plist in sorted(index.postings.items())
        },
        "surface_to_lemma": dict(sorted(index.surface_to_lemma.items())),
        "sentences": sentences,
        "documents": [m.to_json() for m in store.documents()],
        # Pairs, not an object: registration order must survive the
        # sorted-keys serialization, it decides result section order.
        "corpora": [[k, v] for k, v in store.corpora.items()],
    }


def default_built_at() -> str:
    """Build timestamp; honors SOURCE_DATE_EPOCH for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        moment = datetime.datetime.fromtimestamp(int(epoch), tz=datetime.timezone.utc)
    else:
        moment = datetime.datetime.now(tz=datetime.timezone.utc)
    return moment.replace(microsecond=0).isoformat()


def persist_index(
    index: LemmaIndex,
    store: SentenceStore,
    path: Path | str,
    *,
    built_at: str | None = None,
) -> dict:
    """Write the single-file binary form; returns the manifest written."""
    payload = zlib.compress(
        json.dumps(_payload_dict(index, store), ensure_ascii=False, sort_keys=True,
                   separators=(",", ":")).encode("utf-8"),
        6,
    )
    manifest = dict(index.manifest)
    manifest["format_version"] = FORMAT_VERSION
    manifest["built_at"] = built_at if built_at is not None else default_built_at()
    manifest["payload_sha256"] = hashlib.sha256(payload).hexdigest()
    manifest["payload_bytes"] = len(payload)
    manifest_bytes = json.dumps(manifest, ensure_ascii=False, sort_keys=True).encode("utf-8")

    blob = _HEADER.pack(MAGIC, FORMAT_VERSION, len(manifest_bytes)) + manifest_bytes + payload
    Path(path).write_bytes(blob)
    return manifest


def read_manifest(path: Path | str) -> dict:
    """Read only the manifest header; cheap enough for health checks."""
    blob = Path(path).read_bytes()
    version, manifest, _ = _split_file(blob)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(version)
    return manifest


def _split_file(blob: bytes) -> tuple[int, dict, bytes]:
    if len(blob) < _HEADER.size:
        raise CorruptFileError("file too short for header")
    magic, version, manifest_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptFileError("bad magic; not an index file")
    body = blob[_HEADER.size:]
    if len(body) < manifest_len:
        raise CorruptFileError("truncated manifest")
    try:
        manifest = json.loads(body[:manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"unreadable manifest: {exc}") from exc
    if not isinstance(manifest, dict):
        raise CorruptFileError("manifest is not an object")
    return version, manifest, body[manifest_len:]


def load_index(path: Path | str) -> tuple[LemmaIndex, SentenceStore]:
    """Load a persisted index; observationally identical to what was saved."""
    blob = Path(path).read_bytes()
    version, manifest, payload = _split_file(blob)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(version)
    digest = hashlib.sha256(payload).hexdigest()
    if digest != manifest.get("payload_sha256"):
        raise ChecksumMismatchError(
            f"payload sha256 {digest} != manifest {manifest.get('payload_sha256')}"
        )
    try:
        data = json.loads(zlib.decompress(payload).decode("utf-8"))
    except (zlib.error, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"unreadable payload: {exc}") from exc

    index = LemmaIndex()
    try:
        index.postings = {
            lemma: tuple(Posting(c, d, int(o), int(p)) for c, d, o, p in plist)
            for lemma, plist in data["postings"].items()
        }
        index.surface_to_lemma = dict(data["surface_to_lemma"])
        index.manifest = manifest
        store = SentenceStore()
        for row in data["documents"]:
            store.add_document(DocumentMetadata.from_json(row))
        store.corpora = {k: v for k, v in data["corpora"]}
        for corpus, doc_id, ordinal, text, offsets, lemmas, upos in data["sentences"]:
            store.add_sentence(
                corpus,
                doc_id,
                int(ordinal),
                StoredSentence(
                    text=text,
                    offsets=tuple((int(a), int(b)) for a, b in offsets),
                    lemmas=tuple(lemmas),
                    upos=tuple(upos),
                ),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFileError(f"payload structure: {exc}") from exc
    return index, store


@dataclass
class VerifyReport:
    path: str
    manifest: dict
    token_count: int
    posting_count: int
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def verify_index(path: Path | str) -> VerifyReport:
    """Structural invariants of a persisted index, beyond the checksum."""
    index, store = load_index(path)
    problems: list[str] = []

    covered: set[tuple[str, str, int, int]] = set()
    for lemma, plist in index.postings.items():
        if list(plist) != sorted(set(plist)):
            problems.append(f"postings for {lemma!r} not sorted/unique")
        for p in plist:
            key = (p.corpus, p.doc_id, p.sentence_ordinal, p.token_position)
            if key in covered:
                problems.append(f"token {key} appears in more than one posting")
            covered.add(key)
            try:
                sent = store.sentence(p.corpus, p.doc_id, p.sentence_ordinal)
            except KeyError:
                problems.append(f"posting {key} has no stored sentence")
                continue
            if not 0 <= p.token_position < len(sent):
                problems.append(f"posting {key} outside its sentence")

    token_count = store.token_count()
    if len(covered) != token_count:
        problems.append(f"{token_count} stored tokens vs {len(covered)} posted")
    if index.posting_count() != token_count:
        problems.append("posting count != token count")

    for key in store.sentence_keys():
        sent = store.sentence(*key)
        if not (len(sent.offsets) == len(sent.lemmas) == len(sent.upos)):
            problems.append(f"sentence {key} has ragged columns")
            continue
        last = 0
        for start, end in sent.offsets:
            if start < last or end > len(sent.text) or start >= end:
                problems.append(f"sentence {key} has bad offsets")
                break
            last = end

    return VerifyReport(
        path=str(path),
        manifest=index.manifest,
        token_count=token_count,
        posting_count=index.posting_count(),
        problems=problems,
    )
