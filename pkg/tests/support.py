"""Builders and reference implementations shared across the test suite.

The reference implementations here are written straight from the
documented behavior (plain scans, dense matrices) without touching the
package's index or graph machinery, so the package can be checked
against them rather than against itself.
"""
from __future__ import annotations

import random
from pathlib import Path

from ctsearch.corpus import AnnotatedDocument, DocumentMetadata, Sentence, Token

REPO_ROOT = Path(__file__).resolve().parent.parent
SAMPLE_ANNOTATED = REPO_ROOT / "sample" / "annotated"
SAMPLE_RAW = REPO_ROOT / "sample" / "raw"

VOCAB_50 = tuple(f"w{i:02d}" for i in range(50))


def load_sample_documents() -> list[AnnotatedDocument]:
    """The bundled sample corpora with manifest metadata attached."""
    from ctsearch.conllu import read_conllu_file
    from ctsearch.ingest import load_manifest

    documents = []
    for corpus in ("tac", "nlab"):
        manifest = {
            m.doc_id: m
            for m in load_manifest(SAMPLE_ANNOTATED / f"{corpus}.meta.jsonl")
        }
        for doc in read_conllu_file(SAMPLE_ANNOTATED / f"{corpus}.conllu"):
            documents.append(
                AnnotatedDocument(metadata=manifest[doc.doc_id], sentences=doc.sentences)
            )
    return documents


def make_sentence(specs, sent_id: str = "", text: str | None = None) -> Sentence:
    """Build a sentence from per-token specs.

    Each spec is a form string, or (form, upos), or (form, upos, lemma).
    Lemma defaults to the case-folded form.
    """
    tokens = []
    for i, spec in enumerate(specs, start=1):
        if isinstance(spec, str):
            spec = (spec,)
        form = spec[0]
        upos = spec[1] if len(spec) > 1 else "NOUN"
        lemma = spec[2] if len(spec) > 2 else form.casefold()
        tokens.append(Token(index=i, form=form, lemma=lemma, upos=upos, head=0))
    return Sentence(tokens=tuple(tokens), sent_id=sent_id, text_comment=text)


def make_document(doc_id: str, corpus: str, sentences, **meta) -> AnnotatedDocument:
    return AnnotatedDocument(
        metadata=DocumentMetadata(doc_id=doc_id, corpus=corpus, **meta),
        sentences=tuple(sentences),
    )


def random_documents(
    rng: random.Random,
    *,
    corpus: str = "rnd",
    max_documents: int = 3,
    max_sentences: int = 500,
    max_tokens: int = 20,
    vocab: tuple[str, ...] = VOCAB_50,
    punct_rate: float = 0.15,
) -> list[AnnotatedDocument]:
    """A small random corpus with occasional punctuation tokens.

    Sentence count is drawn per corpus, then split over 1..max_documents
    documents so document boundaries get exercised too.
    """
    n_sentences = rng.randint(1, max_sentences)
    n_docs = rng.randint(1, max_documents)
    per_doc = [[] for _ in range(n_docs)]
    for s in range(n_sentences):
        sent_no = rng.randrange(n_docs)
        tokens = []
        for i in range(1, rng.randint(1, max_tokens) + 1):
            if rng.random() < punct_rate:
                tokens.append(Token(index=i, form=",", lemma=",", upos="PUNCT"))
            else:
                word = rng.choice(vocab)
                tokens.append(Token(index=i, form=word, lemma=word, upos="NOUN"))
        per_doc[sent_no].append(Sentence(tokens=tuple(tokens), sent_id=f"s{s}"))
    return [
        make_document(f"{corpus}-d{d}", corpus, sentences)
        for d, sentences in enumerate(per_doc)
        if sentences
    ]


def scan_phrase(documents, lemmas) -> list[tuple[str, str, int, tuple[int, ...]]]:
    """Plain sentence scan for a lemma phrase.

    A match is strictly increasing token positions p1..pk where token pi
    carries lemma i and is not punctuation, and every token strictly
    between consecutive positions is punctuation. Returns
    (corpus, doc_id, sentence_ordinal, positions) tuples.
    """
    wanted = [l.casefold() for l in lemmas]
    found = []
    for doc in documents:
        for ordinal, sentence in enumerate(doc.sentences):
            toks = sentence.tokens
            for start in range(len(toks)):
                if toks[start].upos == "PUNCT":
                    continue
                if toks[start].lemma.casefold() != wanted[0]:
                    continue
                positions = [start]
                cursor = start + 1
                for lemma in wanted[1:]:
                    while cursor < len(toks) and toks[cursor].upos == "PUNCT":
                        cursor += 1
                    if cursor >= len(toks) or toks[cursor].lemma.casefold() != lemma:
                        positions = None
                        break
                    positions.append(cursor)
                    cursor += 1
                if positions is not None:
                    found.append((doc.corpus, doc.doc_id, ordinal, tuple(positions)))
    return found


def dense_pagerank(
    nodes,
    adjacency,
    *,
    damping: float = 0.85,
    iterations: int = 100,
    tolerance: float = 1e-6,
) -> dict[str, float]:
    """Dense matrix power iteration of s = (1-d) + d * M s.

    M[v][u] = 1/deg(u) when u and v are adjacent. Same fixed point and
    same Jacobi sweep as the package's scorer, but computed via numpy
    matrix products over a dense array.
    """
    import numpy as np

    order = list(nodes)
    pos = {n: i for i, n in enumerate(order)}
    n = len(order)
    matrix = np.zeros((n, n))
    for v in order:
        for u in adjacency.get(v, ()):
            deg = len(adjacency[u])
            if deg:
                matrix[pos[v], pos[u]] = 1.0 / deg
    scores = np.ones(n)
    for _ in range(iterations):
        updated = (1.0 - damping) + damping * (matrix @ scores)
        delta = float(np.max(np.abs(updated - scores))) if n else 0.0
        scores = updated
        if delta < tolerance:
            break
    return {node: float(scores[pos[node]]) for node in order}


_NOUNISH = {"ADJ", "NOUN"}


def scan_noun_phrases(documents) -> dict[tuple[str, ...], int]:
    """Reference count of containment-maximal default-pattern spans.

    The two default patterns are interpreted directly on UPOS names:
    a non-empty run of ADJ/NOUN tokens ending in NOUN, or a non-empty
    run of PROPN tokens. Spans strictly inside another matching span are
    discarded; survivors are counted by their lemma tuple.
    """
    counts: dict[tuple[str, ...], int] = {}
    for doc in documents:
        for sentence in doc.sentences:
            toks = sentence.tokens
            n = len(toks)
            spans = set()
            for i in range(n):
                for j in range(i + 1, n + 1):
                    window = toks[i:j]
                    nounish = all(t.upos in _NOUNISH for t in window)
                    if nounish and window[-1].upos == "NOUN":
                        spans.add((i, j))
                    elif all(t.upos == "PROPN" for t in window):
                        spans.add((i, j))
            maximal = [
                (i, j)
                for (i, j) in spans
                if not any(
                    (a <= i and j <= b) and (a, b) != (i, j) for (a, b) in spans
                )
            ]
            for i, j in maximal:
                lemma_form = tuple(t.lemma.casefold() for t in toks[i:j])
                counts[lemma_form] = counts.get(lemma_form, 0) + 1
    return counts


_CONLLU_FORMS = (
    "category", "categories", "functor", "monad", "the", "a", "free",
    "double", "is", "admits", ",", ".", "Kan", "Ehresmann", "2-category",
)
_CONLLU_UPOS = ("NOUN", "VERB", "ADJ", "DET", "PROPN", "PUNCT", "X")


def random_conllu_text(rng: random.Random, *, max_docs: int = 3,
                       max_sentences: int = 4, max_tokens: int = 8) -> str:
    """Generate CONLL-U text exercising the whole modeled surface.

    Includes document boundaries, empty documents, sent_id/text/other
    comments, SpaceAfter, multiword ranges, empty nodes, and the odd
    non-numeric head.
    """
    lines: list[str] = []
    for d in range(rng.randint(1, max_docs)):
        lines.append(f"# newdoc id = doc-{d}")
        for s in range(rng.randint(0, max_sentences)):
            n = rng.randint(1, max_tokens)
            forms = [rng.choice(_CONLLU_FORMS) for _ in range(n)]
            if rng.random() < 0.8:
                lines.append(f"# sent_id = d{d}-s{s}")
            if rng.random() < 0.3:
                lines.append("# source = generated")
            if rng.random() < 0.6:
                lines.append(f"# text = {' '.join(forms)}")
            for i in range(1, n + 1):
                if rng.random() < 0.08:
                    lines.append(
                        f"{i}-{i + 1}\t{forms[i - 1]}x\t_\t_\t_\t_\t_\t_\t_\t_"
                    )
                if rng.random() < 0.05:
                    lines.append(f"{i - 1}.1\tnull\tnull\tPRON\t_\t_\t_\t_\t_\t_")
                head = "x" if rng.random() < 0.05 else str(rng.randint(0, n))
                misc = "SpaceAfter=No" if rng.random() < 0.2 else "_"
                feats = "Number=Plur" if rng.random() < 0.3 else "_"
                lines.append(
                    "\t".join(
                        (
                            str(i),
                            forms[i - 1],
                            forms[i - 1].casefold(),
                            rng.choice(_CONLLU_UPOS),
                            "_",
                            feats,
                            head,
                            rng.choice(("nsubj", "obj", "det", "root", "_")),
                            "_",
                            misc,
                        )
                    )
                )
            lines.append("")
    return "\n".join(lines) + "\n"


def textrank_fixture_documents() -> list[AnnotatedDocument]:
    """A fixed 30-sentence corpus with a non-trivial co-occurrence graph.

    Deterministic by construction: a seeded generator over a small
    noun/adjective vocabulary, with verbs interleaved so not every token
    is a content word.
    """
    rng = random.Random(3041)
    nouns = [f"n{i}" for i in range(18)]
    adjs = [f"a{i}" for i in range(8)]
    verbs = ["holds", "forms", "yields", "admits"]
    sentences = []
    for s in range(30):
        length = rng.randint(5, 14)
        tokens = []
        for i in range(1, length + 1):
            roll = rng.random()
            if roll < 0.45:
                word = rng.choice(nouns)
                upos = "NOUN"
            elif roll < 0.70:
                word = rng.choice(adjs)
                upos = "ADJ"
            elif roll < 0.85:
                word = rng.choice(verbs)
                upos = "VERB"
            else:
                word = ","
                upos = "PUNCT"
            tokens.append(Token(index=i, form=word, lemma=word, upos=upos))
        sentences.append(Sentence(tokens=tuple(tokens), sent_id=f"tr-{s}"))
    return [make_document("tr-doc", "synthetic", sentences)]
