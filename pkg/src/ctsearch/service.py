"""HTTP JSON API over one loaded index.

Three endpoints: /api/search, /api/link, /api/health. Responses follow
the JSON Schemas bundled under schemas/; errors share one envelope,
{"error": {"code", "message"}}. All requests are read-only, so any
response is reproducible until the index file changes.
"""
from __future__ import annotations

import json
import logging
import sys
import time
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import ApiConfig
from .engine import Engine, UpstreamFailure
from .search import EmptyQueryError, UnknownCorpusError

log = logging.getLogger("ctsearch.service")

SCHEMA_DIR = Path(__file__).parent / "schemas"


def load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / name).read_text(encoding="utf-8"))


class _JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "ts": self.formatTime(record, "%Y-%m-%dT%H:%M:%S%z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        extra = getattr(record, "fields", None)
        if extra:
            entry.update(extra)
        return json.dumps(entry, ensure_ascii=False)


def configure_logging(level: str = "INFO") -> None:
    """Structured one-line-JSON logs on stderr."""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonLineFormatter())
    root = logging.getLogger("ctsearch")
    root.handlers = [handler]
    root.setLevel(level.upper())
    root.propagate = False


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    body = {"error": {"code": code, "message": message}}
    body.update(extra)
    return JSONResponse(status_code=status, content=body)


def create_app(config: ApiConfig, *, engine: Engine | None = None) -> FastAPI:
    """Build the app. The index loads on startup; with `engine` given,
    startup is a no-op (useful under test)."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if app.state.engine is None:
            app.state.engine = Engine.from_config(config)
            manifest = app.state.engine.index.manifest
            log.info(
                "index loaded",
                extra={"fields": {"tokens": manifest.get("token_count"),
                                  "built_at": manifest.get("built_at")}},
            )
        yield

    app = FastAPI(title="ctsearch", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.engine = engine
    app.state.config = config

    if config.cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def access_log(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        log.info(
            "request",
            extra={
                "fields": {
                    "method": request.method,
                    "path": request.url.path,
                    "status": response.status_code,
                    "ms": round((time.perf_counter() - started) * 1000, 2),
                }
            },
        )
        return response

    def ready() -> Engine | None:
        return app.state.engine

    @app.get("/api/search")
    async def api_search(q: str = "", corpora: str = "", limit: int | None = None, offset: int = 0):
        engine = ready()
        if engine is None:
            return _error(503, "index-not-loaded", "the index is not loaded yet")
        wanted = [c for c in corpora.split(",") if c.strip()] or None
        if limit is not None and limit < 1:
            return _error(400, "bad-limit", "limit must be at least 1")
        if offset < 0:
            return _error(400, "bad-offset", "offset must not be negative")
        try:
            payload = engine.search_payload(q, wanted, limit=limit, offset=offset)
        except EmptyQueryError:
            return _error(400, "empty-query", "q must contain at least one word")
        except UnknownCorpusError as exc:
            return _error(400, "unknown-corpus", str(exc))
        return JSONResponse(payload)

    @app.get("/api/link")
    async def api_link(q: str = ""):
        engine = ready()
        if engine is None:
            return _error(503, "index-not-loaded", "the index is not loaded yet")
        if not q.strip():
            return _error(400, "empty-query", "q must contain at least one word")
        try:
            return JSONResponse(engine.link_payload(q))
        except UpstreamFailure as exc:
            return JSONResponse(status_code=502, content=exc.body)

    @app.get("/api/health")
    async def api_health():
        engine = ready()
        if engine is None:
            return JSONResponse(
                status_code=503,
                content={"status": "unavailable", "mode": config.mode, "index_manifest": None},
            )
        return JSONResponse(engine.health_payload())

    return app
