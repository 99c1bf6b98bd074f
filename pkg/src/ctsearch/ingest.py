"""Corpus ingestion: raw files to clean, filtered, annotated documents.

Inputs are a directory of raw files (.md wiki pages, .tex abstracts, or
already-annotated .conllu) plus a JSONL metadata manifest with one row
per document. Annotation itself happens upstream; .conllu inputs pass
through validation and filtering, while raw text gets cleaned, split,
and emitted with identity annotations (lemma = form, UPOS = X) so that
search still works at the surface level until real annotations exist.
"""
from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .conllu import ParseIssue, parse_conllu, serialize_conllu
from .corpus import AnnotatedDocument, DocumentMetadata, Sentence, Token, normalize_corpus_id
from .markdown import strip_markdown
from .mathtext import replace_math

log = logging.getLogger(__name__)

META_TITLE_PREFIXES = ("list of", "category:")
META_TITLE_EXACT = ("contents",)
META_TAGS = frozenset({"book", "person", "meta"})

RAW_EXTENSIONS = (".conllu", ".md", ".tex", ".txt")


class ManifestError(ValueError):
    pass


def load_manifest(path: Path | str) -> list[DocumentMetadata]:
    """Read a JSONL manifest; one document per line."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: line {lineno}: {exc}") from exc
        if "doc_id" not in payload:
            raise ManifestError(f"{path}: line {lineno}: missing doc_id")
        rows.append(DocumentMetadata.from_json(payload))
    return rows


def write_manifest(rows: list[DocumentMetadata], path: Path | str) -> None:
    text = "".join(json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) + "\n" for r in rows)
    Path(path).write_text(text, encoding="utf-8")


def meta_document_reason(meta: DocumentMetadata) -> str | None:
    """Why a document is a meta page, or None when it is conceptual."""
    title = meta.title.strip().casefold()
    for prefix in META_TITLE_PREFIXES:
        if title.startswith(prefix):
            return f"title starts with {prefix!r}"
    if title in META_TITLE_EXACT:
        return f"title is {title!r}"
    marked = sorted(META_TAGS.intersection(t.casefold() for t in meta.tags))
    if marked:
        return f"tagged {marked[0]}"
    return None


def filter_meta_documents(
    docs: list[AnnotatedDocument],
) -> tuple[list[AnnotatedDocument], list[AnnotatedDocument]]:
    """Partition into (kept, dropped), preserving input order."""
    kept, dropped = [], []
    for doc in docs:
        (dropped if meta_document_reason(doc.metadata) else kept).append(doc)
    return kept, dropped


# --- raw-text cleaning ----------------------------------------------------

_TEX_COMMENT = re.compile(r"(?<!\\)%.*$", re.MULTILINE)
_TEX_WRAPPER = re.compile(r"\\(?:emph|textbf|textit|texttt|textsc|mbox|text)\{([^{}]*)\}")
_TEX_CITE = re.compile(r"\\(?:cite|ref|eqref|label|cref)\{[^{}]*\}")
_TEX_BREAK = re.compile(r"\\\\|\\(?:par|newline|noindent|medskip|smallskip|bigskip)\b")
_WS_RUN = re.compile(r"[ \t]+")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9(\"'])")
_WORD_OR_MARK = re.compile(r"[A-Za-z0-9]+(?:[-'][A-Za-z0-9]+)*|\S")


def clean_markup(text: str, kind: str) -> str:
    """Markup and math removal for one raw file; `kind` is md or tex."""
    text = unicodedata.normalize("NFC", text)
    text = replace_math(text)
    if kind == "tex":
        text = _TEX_COMMENT.sub("", text)
        for _ in range(4):  # wrappers nest occasionally
            text, n = _TEX_WRAPPER.subn(r"\1", text)
            if not n:
                break
        text = _TEX_CITE.sub("", text)
        text = _TEX_BREAK.sub(" ", text)
    else:
        text = strip_markdown(text)
    text = _WS_RUN.sub(" ", text)
    return "\n".join(line.strip() for line in text.splitlines()).strip()


def split_sentences(text: str) -> list[str]:
    out = []
    for paragraph in re.split(r"\n\s*\n", text):
        flat = " ".join(paragraph.split())
        if not flat:
            continue
        out.extend(s for s in _SENTENCE_SPLIT.split(flat) if s.strip())
    return out


def tokenize_plain(sentence: str) -> list[str]:
    return _WORD_OR_MARK.findall(sentence)


_PUNCT_CHARS = set(".,;:!?()[]{}\"'`")


def document_from_raw(meta: DocumentMetadata, raw: str, kind: str) -> AnnotatedDocument:
    """Clean raw text and wrap it in identity annotations."""
    cleaned = clean_markup(raw, kind)
    sentences = []
    for ordinal, sent_text in enumerate(split_sentences(cleaned), start=1):
        forms = tokenize_plain(sent_text)
        if not forms:
            continue
        tokens = tuple(
            Token(
                index=i,
                form=form,
                lemma=form.casefold(),
                upos="PUNCT" if form in _PUNCT_CHARS else "X",
                head=0,
                deprel="_",
            )
            for i, form in enumerate(forms, start=1)
        )
        sentences.append(
            Sentence(
                tokens=tokens,
                sent_id=f"{meta.doc_id}-s{ordinal}",
                text_comment=sent_text,
            )
        )
    return AnnotatedDocument(metadata=meta, sentences=tuple(sentences))


# --- pipeline -------------------------------------------------------------

@dataclass
class DropRecord:
    doc_id: str
    reason: str


@dataclass
class IngestResult:
    documents: list[AnnotatedDocument]
    dropped: list[DropRecord]
    issues: list[ParseIssue]


def locate_raw_file(raw_dir: Path, meta: DocumentMetadata) -> Path | None:
    for ext in RAW_EXTENSIONS:
        candidate = raw_dir / f"{meta.doc_id}{ext}"
        if candidate.is_file():
            return candidate
    return None


def ingest_corpus(corpus_id: str, raw_dir: Path | str, manifest_path: Path | str) -> IngestResult:
    """Run the full ingest for one corpus; never aborts on one bad file."""
    corpus_id = normalize_corpus_id(corpus_id)
    raw_dir = Path(raw_dir)
    documents: list[AnnotatedDocument] = []
    dropped: list[DropRecord] = []
    issues: list[ParseIssue] = []

    for meta in load_manifest(manifest_path):
        if meta.corpus and meta.corpus != corpus_id:
            continue
        if not meta.corpus:
            meta = DocumentMetadata.from_json({**meta.to_json(), "corpus": corpus_id})
        reason = meta_document_reason(meta)
        if reason:
            dropped.append(DropRecord(meta.doc_id, reason))
            continue
        path = locate_raw_file(raw_dir, meta)
        if path is None:
            dropped.append(DropRecord(meta.doc_id, "no raw file found"))
            log.warning("%s: no raw file under %s", meta.doc_id, raw_dir)
            continue
        if path.suffix == ".conllu":
            parsed = parse_conllu(path.read_text(encoding="utf-8"), default_corpus=corpus_id, issues=issues)
            sentences: tuple[Sentence, ...] = tuple(s for d in parsed for s in d.sentences)
            doc = AnnotatedDocument(metadata=meta, sentences=sentences)
        else:
            kind = "tex" if path.suffix == ".tex" else "md"
            doc = document_from_raw(meta, path.read_text(encoding="utf-8"), kind)
        if not doc.sentences:
            dropped.append(DropRecord(meta.doc_id, "no sentences after cleaning"))
            log.warning("%s: dropped, no sentences after cleaning", meta.doc_id)
            continue
        documents.append(doc)

    return IngestResult(documents=documents, dropped=dropped, issues=issues)


def write_ingest_output(result: IngestResult, corpus_id: str, out_dir: Path | str) -> dict[str, Path]:
    """Emit CONLL-U, kept-document manifest, drop report, and clean text."""
    corpus_id = normalize_corpus_id(corpus_id)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_dir = out_dir / "text"

    conllu_path = out_dir / f"{corpus_id}.conllu"
    conllu_path.write_text(serialize_conllu(result.documents), encoding="utf-8")

    manifest_path = out_dir / f"{corpus_id}.manifest.jsonl"
    write_manifest([d.metadata for d in result.documents], manifest_path)

    drops_path = out_dir / f"{corpus_id}.drops.jsonl"
    drops_path.write_text(
        "".join(
            json.dumps({"doc_id": d.doc_id, "reason": d.reason}, sort_keys=True) + "\n"
            for d in result.dropped
        ),
        encoding="utf-8",
    )

    text_dir.mkdir(exist_ok=True)
    for doc in result.documents:
        body = "\n".join(s.text for s in doc.sentences) + "\n"
        (text_dir / f"{doc.doc_id}.txt").write_text(body, encoding="utf-8")

    return {"conllu": conllu_path, "manifest": manifest_path, "drops": drops_path, "text": text_dir}
