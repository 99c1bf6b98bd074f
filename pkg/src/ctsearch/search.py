"""Phrase search over the lemma index.

Queries are lemmatized word by word, then matched against consecutive
token positions within single sentences. Punctuation tokens are skipped
between matched words but never matched themselves. Results group into
per-corpus sections of document cards, ordered by match count.
"""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import DocumentMetadata
from .index import LemmaIndex, Posting, SentenceStore
from .lemmatize import fallback_lemma

PUNCT = "PUNCT"
DEFAULT_CARD_LIMIT = 100


class EmptyQueryError(ValueError):
    pass


class UnknownCorpusError(ValueError):
    def __init__(self, corpus: str, known: list[str]) -> None:
        self.corpus = corpus
        super().__init__(f"unknown corpus {corpus!r}; known: {', '.join(known)}")


def lemmatize_query(raw: str, index: LemmaIndex) -> list[str]:
    """Case-folded lemma sequence for a free-text query.

    The corpus surface-form table takes precedence; the rule-based
    fallback only fires for unseen words, and unknown words pass through
    case-folded so they still match their own lemma if it ever appears.
    """
    words = raw.split()
    if not words:
        raise EmptyQueryError("query is empty")
    lemmas = []
    for word in words:
        key = word.casefold()
        lemmas.append(index.surface_to_lemma.get(key) or fallback_lemma(key))
    return lemmas


@dataclass(frozen=True)
class PhraseMatch:
    """One phrase occurrence, anchored at its first token's posting.

    `token_positions` lists the matched (non-punctuation) positions;
    `highlight` is the [start, end) character range in the sentence text
    from the first matched token to the last.
    """

    posting: Posting
    length: int
    token_positions: tuple[int, ...]
    highlight: tuple[int, int]


def find_phrase_matches(
    index: LemmaIndex,
    store: SentenceStore,
    lemmas: list[str] | tuple[str, ...],
    corpora: set[str] | None = None,
) -> list[PhraseMatch]:
    """All occurrences of the lemma phrase, in posting order."""
    if not lemmas:
        raise EmptyQueryError("no lemmas to match")
    wanted = [lemma.casefold() for lemma in lemmas]
    out: list[PhraseMatch] = []
    for posting in index.lookup(wanted[0]):
        if corpora is not None and posting.corpus not in corpora:
            continue
        sent = store.sentence(posting.corpus, posting.doc_id, posting.sentence_ordinal)
        positions = _walk(sent.lemmas, sent.upos, posting.token_position, wanted)
        if positions is None:
            continue
        out.append(
            PhraseMatch(
                posting=posting,
                length=len(positions),
                token_positions=positions,
                highlight=(sent.offsets[positions[0]][0], sent.offsets[positions[-1]][1]),
            )
        )
    return out


def _walk(
    lemmas: tuple[str, ...],
    upos: tuple[str, ...],
    start: int,
    wanted: list[str],
) -> tuple[int, ...] | None:
    if upos[start] == PUNCT or lemmas[start].casefold() != wanted[0]:
        return None
    positions = [start]
    cursor = start + 1
    for lemma in wanted[1:]:
        while cursor < len(lemmas) and upos[cursor] == PUNCT:
            cursor += 1
        if cursor >= len(lemmas) or lemmas[cursor].casefold() != lemma:
            return None
        positions.append(cursor)
        cursor += 1
    return tuple(positions)


def merge_spans(spans: list[tuple[int, int]] | tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    """Sort spans and merge any that overlap or touch."""
    cleaned = sorted((s, e) for s, e in spans if e > s)
    merged: list[tuple[int, int]] = []
    for start, end in cleaned:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return tuple(merged)


def highlight_sentence(
    text: str,
    spans: list[tuple[int, int]] | tuple[tuple[int, int], ...],
) -> list[tuple[str, bool]]:
    """Split text into (segment, highlighted) pieces.

    Spans are clipped to the text, merged, and the concatenation of all
    segments equals the input exactly.
    """
    clipped = [(max(0, s), min(len(text), e)) for s, e in spans]
    merged = merge_spans(clipped)
    pieces: list[tuple[str, bool]] = []
    cursor = 0
    for start, end in merged:
        if start > cursor:
            pieces.append((text[cursor:start], False))
        pieces.append((text[start:end], True))
        cursor = end
    if cursor < len(text):
        pieces.append((text[cursor:], False))
    return pieces


@dataclass(frozen=True)
class MatchedSentence:
    ordinal: int
    text: str
    matches: tuple[PhraseMatch, ...]
    highlights: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class DocumentCard:
    metadata: DocumentMetadata
    sentences: tuple[MatchedSentence, ...]
    match_count: int


@dataclass(frozen=True)
class CorpusResults:
    corpus: str
    display_name: str
    total_documents: int
    cards: tuple[DocumentCard, ...]


@dataclass(frozen=True)
class SearchResult:
    query: str
    lemmas: tuple[str, ...]
    corpora: tuple[CorpusResults, ...]
    limit: int = DEFAULT_CARD_LIMIT
    offset: int = 0


def group_results(
    matches: list[PhraseMatch],
    store: SentenceStore,
    corpora_filter: set[str] | None = None,
    *,
    limit: int = DEFAULT_CARD_LIMIT,
    offset: int = 0,
) -> tuple[CorpusResults, ...]:
    """Group matches into per-corpus card sections.

    Deterministic regardless of input order: cards sort by descending
    match count then doc_id, sentences by ordinal, matches by position.
    Corpora follow the store's registration order; a corpus outside
    `corpora_filter` is omitted entirely.
    """
    by_doc: dict[tuple[str, str], list[PhraseMatch]] = {}
    for match in matches:
        if corpora_filter is not None and match.posting.corpus not in corpora_filter:
            continue
        by_doc.setdefault((match.posting.corpus, match.posting.doc_id), []).append(match)

    sections: list[CorpusResults] = []
    for corpus, display_name in store.corpora.items():
        if corpora_filter is not None and corpus not in corpora_filter:
            continue
        doc_ids = sorted(d for c, d in by_doc if c == corpus)
        cards = [
            _build_card(store, corpus, doc_id, by_doc[(corpus, doc_id)])
            for doc_id in doc_ids
        ]
        cards.sort(key=lambda card: (-card.match_count, card.metadata.doc_id))
        window = cards[offset:offset + limit] if limit else cards[offset:]
        sections.append(
            CorpusResults(
                corpus=corpus,
                display_name=display_name,
                total_documents=len(cards),
                cards=tuple(window),
            )
        )
    return tuple(sections)


def _build_card(
    store: SentenceStore,
    corpus: str,
    doc_id: str,
    matches: list[PhraseMatch],
) -> DocumentCard:
    by_sentence: dict[int, list[PhraseMatch]] = {}
    for match in matches:
        by_sentence.setdefault(match.posting.sentence_ordinal, []).append(match)
    sentences = []
    for ordinal in sorted(by_sentence):
        sent = store.sentence(corpus, doc_id, ordinal)
        ordered = tuple(sorted(by_sentence[ordinal], key=lambda m: m.posting))
        sentences.append(
            MatchedSentence(
                ordinal=ordinal,
                text=sent.text,
                matches=ordered,
                highlights=merge_spans([m.highlight for m in ordered]),
            )
        )
    return DocumentCard(
        metadata=store.document(corpus, doc_id),
        sentences=tuple(sentences),
        match_count=len(matches),
    )


def run_query(
    index: LemmaIndex,
    store: SentenceStore,
    raw: str,
    corpora: list[str] | None = None,
    *,
    limit: int = DEFAULT_CARD_LIMIT,
    offset: int = 0,
) -> SearchResult:
    """Lemmatize, match, and group in one call. Read-only throughout."""
    corpora_filter: set[str] | None = None
    if corpora:
        corpora_filter = set()
        for name in corpora:
            key = name.strip().casefold()
            if key not in store.corpora:
                raise UnknownCorpusError(name, sorted(store.corpora))
            corpora_filter.add(key)
    lemmas = lemmatize_query(raw, index)
    matches = find_phrase_matches(index, store, lemmas, corpora_filter)
    sections = group_results(matches, store, corpora_filter, limit=limit, offset=offset)
    return SearchResult(
        query=raw,
        lemmas=tuple(lemmas),
        corpora=sections,
        limit=limit,
        offset=offset,
    )


def result_payload(result: SearchResult) -> dict:
    """The wire shape shared by the HTTP API and `search --json`."""
    corpora: dict[str, dict] = {}
    for section in result.corpora:
        corpora[section.corpus] = {
            "display_name": section.display_name,
            "total_documents": section.total_documents,
            "cards": [
                {
                    "doc_id": card.metadata.doc_id,
                    "title": card.metadata.title,
                    "url": card.metadata.source_url or "",
                    "sentences": [
                        {
                            "text": sent.text,
                            "highlights": [[s, e] for s, e in sent.highlights],
                        }
                        for sent in card.sentences
                    ],
                }
                for card in section.cards
            ],
        }
    return {"query": result.query, "lemmas": list(result.lemmas), "corpora": corpora}
