"""Knowledge-base linking: Wikidata SPARQL plus nLab title lookup.

The Wikidata side builds one label/altLabel query per term, optionally
carrying MINUS clauses that exclude metadata-flavored classes by their
immediate P279 superclass. The client runs in one of two modes: `replay`
serves recorded responses from fixture files and never touches the
network; `live` speaks to the public endpoint with polite defaults
(custom user agent, 30 s timeout, two retries with exponential backoff,
at most one request in flight, responses cached per query text).

The nLab side never leaves the process: page titles from the indexed
corpus are matched by lemmatized, case-folded equality.
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import quote

from .index import LemmaIndex, SentenceStore
from .search import lemmatize_query

log = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://query.wikidata.org/sparql"
USER_AGENT = "ctsearch/0.1 (lemma-level concept search; replay-first research tool)"
WIKIDATA = "wikidata"
NLAB = "nlab"

REPLAY = "replay"
LIVE = "live"


class LinkerError(Exception):
    pass


class EmptyTermError(LinkerError):
    pass


class UnescapableTermError(LinkerError):
    pass


class HttpError(LinkerError):
    def __init__(self, message: str, status: int | None = None) -> None:
        self.status = status
        super().__init__(message)


class MalformedResponseError(LinkerError):
    pass


class MissingFixtureError(LinkerError):
    pass


@dataclass(frozen=True)
class KbEntry:
    source: str
    entity_id: str
    label: str
    description: str | None
    url: str


@dataclass(frozen=True)
class FilterEntry:
    class_id: str
    note: str


@dataclass(frozen=True)
class FilterList:
    """Ordered class exclusions; ids unique after normalization."""

    excluded: tuple[FilterEntry, ...]

    def __post_init__(self) -> None:
        ids = [e.class_id.strip().upper() for e in self.excluded]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise ValueError(f"duplicate filter classes: {sorted(dupes)}")

    def class_ids(self) -> tuple[str, ...]:
        return tuple(e.class_id for e in self.excluded)

    def __len__(self) -> int:
        return len(self.excluded)


EMPTY_FILTERS = FilterList(excluded=())

# Metadata-flavored classes excluded by default, in first-seen order.
DEFAULT_FILTERS = FilterList(
    excluded=(
        FilterEntry("Q223557", "Physical object"),
        FilterEntry("Q4167836", "Concrete object"),
        FilterEntry("Q17334923", "Physical location"),
        FilterEntry("Q1914636", "Activity"),
        FilterEntry("Q3769299", "Human Behavior"),
        FilterEntry("Q63539947", "Artistic Concept"),
        FilterEntry("Q186408", "Point in Time"),
        FilterEntry("Q186081", "Time Interval"),
        FilterEntry("Q8142", "Currency"),
    )
)


@dataclass(frozen=True)
class SparqlQuery:
    text: str
    term: str
    filters: FilterList


_CONTROL = re.compile(r"[\x00-\x1f\x7f]")


def escape_term(term: str) -> str:
    """Escape a term for a SPARQL string literal.

    Backslashes and quotes get escaped; control characters are refused
    outright rather than smuggled into the query.
    """
    if not term or not term.strip():
        raise EmptyTermError("term is empty")
    if _CONTROL.search(term):
        raise UnescapableTermError("term contains control characters")
    return term.replace("\\", "\\\\").replace('"', '\\"')


def build_sparql(term: str, filters: FilterList = EMPTY_FILTERS) -> SparqlQuery:
    """Label/altLabel lookup with one MINUS clause per excluded class."""
    literal = escape_term(term)
    minus = "".join(
        f"  MINUS {{ ?item wdt:P279 wd:{entry.class_id} }}\n" for entry in filters.excluded
    )
    text = (
        "SELECT DISTINCT ?item ?itemLabel ?itemDescription\n"
        "WHERE {\n"
        f'  {{?item rdfs:label "{literal}"@en.}} UNION\n'
        f'  {{?item skos:altLabel "{literal}"@en.}}\n'
        f"{minus}"
        "  SERVICE wikibase:label {\n"
        '    bd:serviceParam wikibase:language "en".\n'
        "  }\n"
        "}"
    )
    return SparqlQuery(text=text, term=term, filters=filters)


def normalize_query_text(text: str) -> str:
    return " ".join(text.split())


def entity_url(entity_id: str) -> str:
    if entity_id.startswith("P"):
        return f"https://www.wikidata.org/wiki/Property:{entity_id}"
    return f"https://www.wikidata.org/wiki/{entity_id}"


def parse_sparql_results(body: str) -> list[KbEntry]:
    """SPARQL JSON results -> entries, endpoint order preserved."""
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise MalformedResponseError(f"response is not JSON: {exc}") from exc
    try:
        bindings = data["results"]["bindings"]
    except (KeyError, TypeError):
        raise MalformedResponseError("response has no results.bindings")
    if not isinstance(bindings, list):
        raise MalformedResponseError("results.bindings is not a list")

    entries = []
    for row in bindings:
        item = row.get("item", {}).get("value")
        if not item:
            raise MalformedResponseError(f"binding without item: {row!r}")
        entity_id = item.rsplit("/", 1)[-1]
        label = row.get("itemLabel", {}).get("value", entity_id)
        desc_field = row.get("itemDescription")
        description = desc_field.get("value") if desc_field else None
        entries.append(
            KbEntry(
                source=WIKIDATA,
                entity_id=entity_id,
                label=label,
                description=description,
                url=entity_url(entity_id),
            )
        )
    return entries


# --- fixtures ---------------------------------------------------------------

def bundled_fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


class FixtureStore:
    """Recorded query/response pairs, one JSON file each.

    Files hold {"query", "status", "body"} with the body verbatim.
    Lookups match on whitespace-normalized query text.
    """

    def __init__(self, dirs: list[Path | str] | None = None) -> None:
        self.dirs = [Path(d) for d in (dirs if dirs is not None else [bundled_fixture_dir()])]
        self._by_query: dict[str, tuple[int, str]] | None = None

    def _load(self) -> dict[str, tuple[int, str]]:
        if self._by_query is None:
            table: dict[str, tuple[int, str]] = {}
            for directory in self.dirs:
                if not directory.is_dir():
                    continue
                for path in sorted(directory.glob("*.json")):
                    try:
                        record = json.loads(path.read_text(encoding="utf-8"))
                    except (json.JSONDecodeError, UnicodeDecodeError):
                        log.warning("skipping unreadable fixture %s", path)
                        continue
                    if not isinstance(record, dict) or "query" not in record:
                        continue  # side tables share the directory
                    try:
                        key = normalize_query_text(record["query"])
                        table[key] = (int(record.get("status", 200)), record["body"])
                    except (KeyError, TypeError, ValueError):
                        log.warning("skipping unreadable fixture %s", path)
            self._by_query = table
        return self._by_query

    def lookup(self, query_text: str) -> tuple[int, str] | None:
        return self._load().get(normalize_query_text(query_text))

    def record(self, query_text: str, status: int, body: str, directory: Path | str) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        digest = hashlib.sha256(normalize_query_text(query_text).encode("utf-8")).hexdigest()[:16]
        path = directory / f"wd-{digest}.json"
        path.write_text(
            json.dumps({"query": query_text, "status": status, "body": body},
                       ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        self._by_query = None
        return path


# --- client -----------------------------------------------------------------

_RETRYABLE = {429, 500, 502, 503, 504}


def _httpx_transport(url: str, params: dict, headers: dict, timeout: float) -> tuple[int, dict, str]:
    import httpx

    response = httpx.get(url, params=params, headers=headers, timeout=timeout)
    return response.status_code, dict(response.headers), response.text


class WikidataClient:
    def __init__(
        self,
        endpoint: str = DEFAULT_ENDPOINT,
        mode: str = REPLAY,
        *,
        fixtures: FixtureStore | None = None,
        transport=None,
        timeout: float = 30.0,
        max_retries: int = 2,
        backoff: float = 1.0,
        min_interval: float = 1.0,
        sleep=time.sleep,
        record_dir: Path | str | None = None,
    ) -> None:
        if mode not in (REPLAY, LIVE):
            raise ValueError(f"mode must be {REPLAY!r} or {LIVE!r}, got {mode!r}")
        self.endpoint = endpoint
        self.mode = mode
        self.fixtures = fixtures if fixtures is not None else FixtureStore()
        self.transport = transport
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.min_interval = min_interval
        self.sleep = sleep
        self.record_dir = record_dir
        self._cache: dict[str, list[KbEntry]] = {}
        self._gate = threading.Lock()  # one request in flight
        self._last_request = 0.0

    def query(self, query: SparqlQuery | str) -> list[KbEntry]:
        text = query.text if isinstance(query, SparqlQuery) else query
        if self.mode == REPLAY:
            return self._replay(text)
        return self._live(text)

    def _replay(self, text: str) -> list[KbEntry]:
        found = self.fixtures.lookup(text)
        if found is None:
            raise MissingFixtureError(
                f"no recorded response for query: {normalize_query_text(text)[:120]}..."
            )
        status, body = found
        if status != 200:
            raise HttpError(f"recorded response has status {status}", status=status)
        return parse_sparql_results(body)

    def _live(self, text: str) -> list[KbEntry]:
        key = normalize_query_text(text)
        with self._gate:
            if key in self._cache:
                return list(self._cache[key])
            status, body = self._request(text)
            entries = parse_sparql_results(body)
            self._cache[key] = entries
            if self.record_dir is not None:
                self.fixtures.record(text, status, body, self.record_dir)
            return list(entries)

    def _request(self, text: str) -> tuple[int, str]:
        transport = self.transport if self.transport is not None else _httpx_transport
        params = {"query": text, "format": "json"}
        headers = {"User-Agent": USER_AGENT, "Accept": "application/sparql-results+json"}
        last_error = "no attempt made"
        for attempt in range(self.max_retries + 1):
            wait = self.min_interval - (time.monotonic() - self._last_request)
            if wait > 0:
                self.sleep(wait)
            self._last_request = time.monotonic()
            try:
                status, resp_headers, body = transport(self.endpoint, params, headers, self.timeout)
            except LinkerError:
                raise
            except Exception as exc:  # transport-level timeouts, resets
                last_error = f"transport failure: {exc}"
                status, resp_headers, body = None, {}, ""
            if status == 200:
                return status, body
            if status is not None:
                last_error = f"endpoint returned HTTP {status}"
                if status not in _RETRYABLE:
                    raise HttpError(last_error, status=status)
            if attempt < self.max_retries:
                delay = self.backoff * (2 ** attempt)
                retry_after = _retry_after_seconds(resp_headers)
                if retry_after is not None:
                    delay = max(delay, retry_after)
                self.sleep(delay)
        raise HttpError(f"giving up after {self.max_retries + 1} attempts: {last_error}",
                        status=status)


def _retry_after_seconds(headers: dict) -> float | None:
    for name, value in headers.items():
        if name.lower() == "retry-after":
            try:
                return float(value)
            except (TypeError, ValueError):
                return None
    return None


def query_wikidata(
    query: SparqlQuery | str,
    endpoint: str = DEFAULT_ENDPOINT,
    mode: str = REPLAY,
    **kwargs,
) -> list[KbEntry]:
    """One-shot helper around WikidataClient."""
    return WikidataClient(endpoint=endpoint, mode=mode, **kwargs).query(query)


# --- post filtering ---------------------------------------------------------

class RelationTable:
    """Immediate class relations per entity: P279 always, P31 optional."""

    def __init__(self, relations: dict | None = None) -> None:
        self._p279: dict[str, frozenset[str]] = {}
        self._p31: dict[str, frozenset[str]] = {}
        for entity, value in (relations or {}).items():
            if isinstance(value, dict):
                self._p279[entity] = frozenset(value.get("p279", ()))
                self._p31[entity] = frozenset(value.get("p31", ()))
            else:
                self._p279[entity] = frozenset(value)

    @classmethod
    def from_file(cls, path: Path | str) -> "RelationTable":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def bundled(cls) -> "RelationTable":
        return cls.from_file(bundled_fixture_dir() / "subclass_relations.json")

    def classes(self, entity_id: str, *, include_instance_of: bool = False) -> frozenset[str]:
        classes = self._p279.get(entity_id, frozenset())
        if include_instance_of:
            classes = classes | self._p31.get(entity_id, frozenset())
        return classes


def post_filter_entries(
    entries: list[KbEntry],
    filters: FilterList,
    relations: RelationTable | dict,
    *,
    include_instance_of: bool = False,
) -> list[KbEntry]:
    """Drop entries whose immediate classes hit the filter list.

    Mirrors the server-side MINUS clauses for responses that were built
    without them. Output is a subsequence of the input; applying the
    filter twice changes nothing.
    """
    table = relations if isinstance(relations, RelationTable) else RelationTable(relations)
    excluded = set(filters.class_ids())
    return [
        e for e in entries
        if not table.classes(e.entity_id, include_instance_of=include_instance_of) & excluded
    ]


# --- nLab titles ------------------------------------------------------------

_NLAB_SHOW = re.compile(r"/nlab/show/([^/?#]+)$")


class NlabTitleTable:
    """Lemmatized page-title lookup for the indexed wiki corpus."""

    def __init__(self, index: LemmaIndex, store: SentenceStore, corpus: str = NLAB) -> None:
        self._index = index
        self._table: dict[str, list[KbEntry]] = {}
        for meta in store.documents():
            if meta.corpus != corpus or not meta.title:
                continue
            slug, url = _nlab_address(meta.title, meta.source_url)
            entry = KbEntry(source=NLAB, entity_id=slug, label=meta.title,
                            description=None, url=url)
            self._table.setdefault(self._normalize(meta.title), []).append(entry)
        for entries in self._table.values():
            entries.sort(key=lambda e: e.entity_id)

    def _normalize(self, phrase: str) -> str:
        words = phrase.split()
        if not words:
            return ""
        return " ".join(lemmatize_query(phrase, self._index))

    def lookup(self, term: str) -> list[KbEntry]:
        key = self._normalize(term)
        if not key:
            return []
        return list(self._table.get(key, ()))

    def titles(self) -> list[str]:
        return sorted(e.label for entries in self._table.values() for e in entries)


def _nlab_address(title: str, source_url: str | None) -> tuple[str, str]:
    if source_url:
        m = _NLAB_SHOW.search(source_url)
        if m:
            return m.group(1), source_url
    slug = quote(title.replace(" ", "+"), safe="+")
    return slug, f"https://ncatlab.org/nlab/show/{slug}"


def link_nlab(term: str, titles: NlabTitleTable) -> list[KbEntry]:
    """nLab entries whose lemmatized title equals the lemmatized term."""
    if not term or not term.strip():
        raise EmptyTermError("term is empty")
    return titles.lookup(term)
