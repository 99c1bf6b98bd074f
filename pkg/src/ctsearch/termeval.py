"""Terminology extraction baselines and their evaluation.

Two extractors: a TextRank keyword ranker over a content-word
co-occurrence graph, and a part-of-speech pattern matcher for multiword
expressions. Silver standards come from the corpora themselves (author
keywords, wiki titles occurring in the target corpus), so every gold
term is guaranteed to occur in the evaluated text. Scoring is exact
set precision/recall/F1 over lemma sequences.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .index import LemmaIndex, SentenceStore
from .corpus import AnnotatedDocument
from .search import find_phrase_matches, lemmatize_query

AUTHOR_KEYWORDS = "author-keywords"
NLAB_TITLES = "nlab-titles"

DEFAULT_MWE_PATTERNS = ("(ADJ|NOUN)* NOUN", "PROPN+")


class PatternSyntaxError(ValueError):
    pass


class PredictionFileError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class CandidateTerm:
    surface: str
    lemma_form: tuple[str, ...]
    score: float


@dataclass(frozen=True)
class SilverStandard:
    name: str
    terms: frozenset[tuple[str, ...]]
    provenance: str


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    true_positives: int
    predicted_count: int
    gold_count: int

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "true_positives": self.true_positives,
            "predicted_count": self.predicted_count,
            "gold_count": self.gold_count,
        }


# --- TextRank ---------------------------------------------------------------

@dataclass(frozen=True)
class TextRankParams:
    window: int = 3
    damping: float = 0.85
    iterations: int = 100
    tolerance: float = 1e-6
    top_fraction: float = 1 / 3
    pos_tags: tuple[str, ...] = ("ADJ", "NOUN")


def build_cooccurrence_graph(
    documents: list[AnnotatedDocument],
    params: TextRankParams,
) -> tuple[list[str], dict[str, set[str]]]:
    """Undirected co-occurrence graph over content-word lemmas.

    Two lemmas are adjacent when content-tagged tokens carrying them sit
    within `window` positions of each other in one sentence.
    """
    tags = set(params.pos_tags)
    adjacency: dict[str, set[str]] = {}
    for doc in documents:
        for sentence in doc.sentences:
            content = [
                (i, tok.lemma.casefold())
                for i, tok in enumerate(sentence.tokens)
                if tok.upos in tags
            ]
            for a in range(len(content)):
                pos_a, lemma_a = content[a]
                adjacency.setdefault(lemma_a, set())
                for b in range(a + 1, len(content)):
                    pos_b, lemma_b = content[b]
                    if pos_b - pos_a >= params.window:
                        break
                    if lemma_a == lemma_b:
                        continue
                    adjacency.setdefault(lemma_b, set())
                    adjacency[lemma_a].add(lemma_b)
                    adjacency[lemma_b].add(lemma_a)
    return sorted(adjacency), adjacency


def pagerank_scores(
    nodes: list[str],
    adjacency: dict[str, set[str]],
    *,
    damping: float = 0.85,
    iterations: int = 100,
    tolerance: float = 1e-6,
) -> tuple[dict[str, float], float, int]:
    """Jacobi iteration of S(v) = (1-d) + d * sum S(u)/deg(u).

    Returns (scores, final max-abs delta, steps run). Scores stay
    non-negative; isolated vertices settle at 1-d.
    """
    scores = {node: 1.0 for node in nodes}
    degree = {node: len(adjacency.get(node, ())) for node in nodes}
    delta = 0.0
    steps = 0
    for steps in range(1, iterations + 1):
        updated = {}
        for node in nodes:
            incoming = sum(
                scores[other] / degree[other]
                for other in adjacency.get(node, ())
                if degree[other]
            )
            updated[node] = (1.0 - damping) + damping * incoming
        delta = max((abs(updated[n] - scores[n]) for n in nodes), default=0.0)
        scores = updated
        if delta < tolerance:
            break
    return scores, delta, steps


def extract_textrank(
    documents: list[AnnotatedDocument],
    params: TextRankParams | None = None,
) -> list[CandidateTerm]:
    """Rank content words, keep the top fraction, merge adjacent picks."""
    params = params or TextRankParams()
    nodes, adjacency = build_cooccurrence_graph(documents, params)
    if not nodes:
        return []
    scores, _, _ = pagerank_scores(
        nodes,
        adjacency,
        damping=params.damping,
        iterations=params.iterations,
        tolerance=params.tolerance,
    )
    keep = max(1, math.ceil(len(nodes) * params.top_fraction))
    ranked = sorted(nodes, key=lambda n: (-scores[n], n))
    selected = set(ranked[:keep])

    tags = set(params.pos_tags)
    best: dict[tuple[str, ...], CandidateTerm] = {}
    for doc in documents:
        for sentence in doc.sentences:
            run: list[int] = []
            for i, tok in enumerate(sentence.tokens):
                if tok.upos in tags and tok.lemma.casefold() in selected:
                    run.append(i)
                    continue
                _flush_run(sentence, run, scores, best)
                run = []
            _flush_run(sentence, run, scores, best)
    return sorted(best.values(), key=lambda c: (-c.score, c.lemma_form))


def _flush_run(sentence, run: list[int], scores: dict[str, float], best: dict) -> None:
    if not run:
        return
    tokens = [sentence.tokens[i] for i in run]
    lemma_form = tuple(t.lemma.casefold() for t in tokens)
    candidate = CandidateTerm(
        surface=" ".join(t.form for t in tokens),
        lemma_form=lemma_form,
        score=sum(scores[l] for l in lemma_form),
    )
    held = best.get(lemma_form)
    if held is None or candidate.score > held.score:
        best[lemma_form] = candidate


# --- multiword expressions ---------------------------------------------------

# One char per UPOS tag keeps spans addressable by string index.
_TAG_CHARS = {
    "ADJ": "A", "ADP": "I", "ADV": "R", "AUX": "U", "CCONJ": "C", "DET": "D",
    "INTJ": "J", "NOUN": "N", "NUM": "M", "PART": "T", "PRON": "O",
    "PROPN": "B", "PUNCT": "Z", "SCONJ": "S", "SYM": "Y", "VERB": "V", "X": "W",
}
_TAG_FALLBACK = "Q"
_PATTERN_OPS = set("()|*+?{},0123456789 \t")


@dataclass(frozen=True)
class PosPattern:
    source: str
    regex: re.Pattern


def compile_pos_pattern(pattern: str) -> PosPattern:
    """Compile a tag-name pattern like "(ADJ|NOUN)* NOUN" to a regex.

    Raises PatternSyntaxError at configuration time, never during
    extraction.
    """
    rest = pattern
    for tag in sorted(_TAG_CHARS, key=len, reverse=True):
        rest = rest.replace(tag, _TAG_CHARS[tag])
    stray = [ch for ch in rest if ch not in _PATTERN_OPS and ch not in _TAG_CHARS.values()]
    if stray:
        raise PatternSyntaxError(f"unknown names or operators in {pattern!r}: {stray}")
    compact = re.sub(r"\s+", "", rest)
    if not compact:
        raise PatternSyntaxError("pattern is empty")
    try:
        return PosPattern(source=pattern, regex=re.compile(compact))
    except re.error as exc:
        raise PatternSyntaxError(f"bad pattern {pattern!r}: {exc}") from exc


def _tag_string(sentence) -> str:
    return "".join(_TAG_CHARS.get(t.upos, _TAG_FALLBACK) for t in sentence.tokens)


def _matching_spans(tags: str, patterns: list[PosPattern]) -> set[tuple[int, int]]:
    spans: set[tuple[int, int]] = set()
    n = len(tags)
    for pattern in patterns:
        for i in range(n):
            for j in range(i + 1, n + 1):
                if pattern.regex.fullmatch(tags, i, j):
                    spans.add((i, j))
    return spans


def _maximal_spans(spans: set[tuple[int, int]]) -> list[tuple[int, int]]:
    """Spans not strictly contained in another span; sweep by start."""
    out = []
    max_end = -1
    for start, end in sorted(spans, key=lambda s: (s[0], -s[1])):
        if end > max_end:
            out.append((start, end))
            max_end = end
    return sorted(out)


def extract_mwe(
    documents: list[AnnotatedDocument],
    patterns: tuple[str, ...] = DEFAULT_MWE_PATTERNS,
) -> list[CandidateTerm]:
    """Containment-maximal POS-pattern matches, scored by frequency."""
    compiled = [compile_pos_pattern(p) for p in patterns]
    counts: dict[tuple[str, ...], int] = {}
    first_surface: dict[tuple[str, ...], str] = {}
    for doc in documents:
        for sentence in doc.sentences:
            tags = _tag_string(sentence)
            for start, end in _maximal_spans(_matching_spans(tags, compiled)):
                tokens = sentence.tokens[start:end]
                lemma_form = tuple(t.lemma.casefold() for t in tokens)
                counts[lemma_form] = counts.get(lemma_form, 0) + 1
                first_surface.setdefault(lemma_form, " ".join(t.form for t in tokens))
    candidates = [
        CandidateTerm(surface=first_surface[lf], lemma_form=lf, score=float(count))
        for lf, count in counts.items()
    ]
    return sorted(candidates, key=lambda c: (-c.score, c.lemma_form))


# --- silver standards ---------------------------------------------------------

def normalize_term(phrase: str, index: LemmaIndex) -> tuple[str, ...]:
    return tuple(lemmatize_query(phrase, index))


def build_silver_author(
    index: LemmaIndex,
    store: SentenceStore,
    corpus: str = "tac",
) -> SilverStandard:
    """Author keywords that actually occur in their corpus."""
    terms = set()
    for meta in store.documents():
        if meta.corpus != corpus:
            continue
        for keyword in meta.keywords:
            if not keyword.strip():
                continue
            lemmas = normalize_term(keyword, index)
            if find_phrase_matches(index, store, list(lemmas), corpora={corpus}):
                terms.add(lemmas)
    return SilverStandard(name=f"{corpus}-author-keywords", terms=frozenset(terms),
                          provenance=AUTHOR_KEYWORDS)


def build_silver_titles(
    index: LemmaIndex,
    store: SentenceStore,
    titles: list[str] | None = None,
    title_corpus: str = "nlab",
    target_corpus: str = "tac",
) -> SilverStandard:
    """Wiki page titles that occur as phrases in the target corpus."""
    if titles is None:
        titles = [
            meta.title for meta in store.documents()
            if meta.corpus == title_corpus and meta.title.strip()
        ]
    terms = set()
    for title in titles:
        if not title.strip():
            continue
        lemmas = normalize_term(title, index)
        if find_phrase_matches(index, store, list(lemmas), corpora={target_corpus}):
            terms.add(lemmas)
    return SilverStandard(name=f"{target_corpus}-{title_corpus}-titles",
                          terms=frozenset(terms), provenance=NLAB_TITLES)


# --- scoring -------------------------------------------------------------------

def evaluate(
    predicted: set[tuple[str, ...]] | frozenset[tuple[str, ...]],
    gold: SilverStandard | set[tuple[str, ...]] | frozenset[tuple[str, ...]],
) -> EvalReport:
    """Exact-match set scoring with the usual zero-denominator guards."""
    gold_terms = gold.terms if isinstance(gold, SilverStandard) else frozenset(gold)
    predicted_terms = frozenset(predicted)
    tp = len(predicted_terms & gold_terms)
    precision = tp / len(predicted_terms) if predicted_terms else 0.0
    recall = tp / len(gold_terms) if gold_terms else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        true_positives=tp,
        predicted_count=len(predicted_terms),
        gold_count=len(gold_terms),
    )


def load_predictions(path, index: LemmaIndex) -> set[tuple[str, ...]]:
    """Read a one-term-per-line UTF-8 prediction file."""
    from pathlib import Path

    raw = Path(path).read_bytes()
    terms = set()
    for lineno, line in enumerate(raw.split(b"\n"), start=1):
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise PredictionFileError(lineno, f"not valid UTF-8: {exc}") from exc
        text = text.strip()
        if not text:
            continue
        terms.add(normalize_term(text, index))
    return terms
