"""One loaded index plus linking tables, shared by the API and the CLI.

Keeping the payload builders here guarantees `search --json` and the
HTTP endpoint produce the same bodies: both call the same functions.
"""
from __future__ import annotations

import logging
from pathlib import Path

from .config import ApiConfig
from .index import LemmaIndex, SentenceStore, load_index
from .linker import (
    DEFAULT_FILTERS,
    FixtureStore,
    HttpError,
    KbEntry,
    MissingFixtureError,
    NlabTitleTable,
    RelationTable,
    WikidataClient,
    build_sparql,
    link_nlab,
    post_filter_entries,
)
from .search import result_payload, run_query

log = logging.getLogger(__name__)


class UpstreamFailure(Exception):
    """Live Wikidata lookup failed; carries the partial response body."""

    def __init__(self, message: str, body: dict) -> None:
        self.body = body
        super().__init__(message)


def _kb_payload(entries: list[KbEntry]) -> list[dict]:
    return [
        {
            "id": e.entity_id,
            "label": e.label,
            "description": e.description,
            "url": e.url,
        }
        for e in entries
    ]


def _nlab_payload(entries: list[KbEntry]) -> list[dict]:
    return [{"slug": e.entity_id, "title": e.label, "url": e.url} for e in entries]


class Engine:
    def __init__(
        self,
        index: LemmaIndex,
        store: SentenceStore,
        *,
        mode: str = "replay",
        endpoint: str | None = None,
        fixtures: FixtureStore | None = None,
        relations: RelationTable | None = None,
        result_limit: int = 100,
        include_instance_of: bool = False,
        client: WikidataClient | None = None,
    ) -> None:
        self.index = index
        self.store = store
        self.mode = mode
        self.result_limit = result_limit
        self.include_instance_of = include_instance_of
        self.relations = relations if relations is not None else RelationTable.bundled()
        self.titles = NlabTitleTable(index, store)
        kwargs = {"mode": mode, "fixtures": fixtures}
        if endpoint:
            kwargs["endpoint"] = endpoint
        self.client = client if client is not None else WikidataClient(**kwargs)

    @classmethod
    def from_config(cls, config: ApiConfig) -> "Engine":
        if not config.index_path:
            raise ValueError("no index path configured")
        index, store = load_index(config.index_path)
        fixture_dirs = None
        if config.fixtures_dir:
            from .linker import bundled_fixture_dir

            fixture_dirs = [Path(config.fixtures_dir), bundled_fixture_dir()]
        client = WikidataClient(
            endpoint=config.wikidata_endpoint,
            mode=config.mode,
            fixtures=FixtureStore(fixture_dirs),
            record_dir=config.record_dir,
        )
        return cls(
            index,
            store,
            mode=config.mode,
            result_limit=config.result_limit,
            include_instance_of=config.include_instance_of,
            client=client,
        )

    # -- payloads ----------------------------------------------------------

    def search_payload(
        self,
        q: str,
        corpora: list[str] | None = None,
        limit: int | None = None,
        offset: int = 0,
    ) -> dict:
        result = run_query(
            self.index,
            self.store,
            q,
            corpora,
            limit=limit if limit is not None else self.result_limit,
            offset=offset,
        )
        return result_payload(result)

    def link_payload(self, q: str) -> dict:
        """KB panel body. Raises UpstreamFailure on live endpoint trouble."""
        nlab = _nlab_payload(link_nlab(q, self.titles))
        body: dict = {"query": q, "nlab": nlab}
        try:
            entries = self.client.query(build_sparql(q, DEFAULT_FILTERS))
        except MissingFixtureError:
            log.warning("no recorded response for %r; returning empty panel", q)
            body["wikidata"] = []
            body["warnings"] = ["no recorded response for this query in replay mode"]
            return body
        except HttpError as exc:
            raise UpstreamFailure(
                str(exc),
                {
                    "error": {
                        "code": "upstream-failure",
                        "message": str(exc),
                        "status": exc.status,
                    },
                    "query": q,
                    "nlab": nlab,
                },
            ) from exc
        entries = post_filter_entries(
            entries,
            DEFAULT_FILTERS,
            self.relations,
            include_instance_of=self.include_instance_of,
        )
        body["wikidata"] = _kb_payload(entries)
        return body

    def health_payload(self) -> dict:
        return {
            "status": "ok",
            "mode": self.mode,
            "index_manifest": dict(self.index.manifest),
        }
