"""Command-line front end.

Exit codes follow one contract everywhere: 0 success, 64 usage error,
1 data error (bad input files, corrupt artifacts under inspection),
2 environment error (missing index, unreachable endpoint).
"""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .config import ConfigError, load_config
from .engine import Engine, UpstreamFailure
from .index import (
    DuplicateDocIdError,
    IndexingError,
    build_index,
    persist_index,
    verify_index,
)
from .ingest import ManifestError, ingest_corpus, load_manifest, write_ingest_output
from .linker import EmptyTermError, LinkerError, UnescapableTermError
from .search import EmptyQueryError, UnknownCorpusError, highlight_sentence
from .termeval import (
    PatternSyntaxError,
    PredictionFileError,
    build_silver_author,
    build_silver_titles,
    evaluate,
    extract_mwe,
    extract_textrank,
    load_predictions,
)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_ENV = 2
EXIT_USAGE = 64


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        self.code = code
        super().__init__(message)


def _usage(message: str) -> CliError:
    return CliError(message, EXIT_USAGE)


def _data(message: str) -> CliError:
    return CliError(message, EXIT_DATA)


def _env(message: str) -> CliError:
    return CliError(message, EXIT_ENV)


def _load_engine_or_die(index_path: str, **kwargs) -> Engine:
    from .index import load_index

    try:
        index, store = load_index(index_path)
    except (IndexingError, OSError) as exc:
        raise _env(f"cannot load index {index_path}: {exc}") from exc
    return Engine(index, store, **kwargs)


@click.group(name="ctsearch")
@click.version_option(version=__version__, prog_name="ctsearch")
def cli() -> None:
    """Concept search over annotated mathematical corpora."""


# --- ingest -----------------------------------------------------------------

@cli.command("ingest")
@click.option("--corpus", required=True, help="Corpus id, e.g. tac or nlab.")
@click.option("--raw", "raw_dir", required=True, type=click.Path(path_type=Path),
              help="Directory of raw .md/.tex/.conllu files named by doc id.")
@click.option("--meta", "manifest_path", required=True, type=click.Path(path_type=Path),
              help="JSONL metadata manifest, one document per line.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def ingest_cmd(corpus: str, raw_dir: Path, manifest_path: Path, out_dir: Path) -> None:
    """Clean and filter one corpus, emitting CONLL-U plus reports."""
    if not raw_dir.is_dir():
        raise _data(f"raw directory not found: {raw_dir}")
    try:
        result = ingest_corpus(corpus, raw_dir, manifest_path)
    except (ManifestError, OSError) as exc:
        raise _data(str(exc)) from exc
    paths = write_ingest_output(result, corpus, out_dir)
    for issue in result.issues:
        click.echo(f"note: {issue}", err=True)
    for drop in result.dropped:
        click.echo(f"dropped {drop.doc_id}: {drop.reason}", err=True)
    click.echo(
        f"{len(result.documents)} documents -> {paths['conllu']} "
        f"({len(result.dropped)} dropped, see {paths['drops']})"
    )


# --- index ------------------------------------------------------------------

@cli.group("index")
def index_group() -> None:
    """Build and check index files."""


def _documents_from_sources(sources: tuple[tuple[str, str], ...]) -> list:
    from .corpus import AnnotatedDocument
    from .conllu import read_conllu_file

    documents = []
    for conllu_path, manifest_path in sources:
        try:
            manifest = {m.doc_id: m for m in load_manifest(manifest_path)}
            parsed = read_conllu_file(conllu_path)
        except (ManifestError, OSError) as exc:
            raise _data(str(exc)) from exc
        missing = [d.doc_id for d in parsed if d.doc_id not in manifest]
        if missing:
            raise _data(
                f"{conllu_path}: no manifest rows for: {', '.join(sorted(missing))}"
            )
        documents.extend(
            AnnotatedDocument(metadata=manifest[d.doc_id], sentences=d.sentences)
            for d in parsed
        )
    return documents


@index_group.command("build")
@click.option("--source", "sources", required=True, multiple=True, nargs=2,
              metavar="CONLLU MANIFEST", help="Annotated file plus its manifest; repeatable.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--built-at", default=None, help="Manifest timestamp override (ISO 8601).")
def index_build_cmd(sources: tuple[tuple[str, str], ...], out_path: Path, built_at: str | None) -> None:
    """Build one index file from annotated corpora."""
    documents = _documents_from_sources(sources)
    try:
        index, store = build_index(documents)
    except DuplicateDocIdError as exc:
        raise _data(str(exc)) from exc
    manifest = persist_index(index, store, out_path, built_at=built_at)
    click.echo(
        f"{out_path}: {manifest['token_count']} tokens, "
        f"{manifest['lemma_count']} lemmas, "
        f"documents {manifest['document_counts']}"
    )


def _verify(index_path: Path) -> None:
    if not index_path.exists():
        raise _env(f"index not found: {index_path}")
    try:
        report = verify_index(index_path)
    except IndexingError as exc:
        raise _data(f"{index_path}: {exc}") from exc
    except OSError as exc:
        raise _env(str(exc)) from exc
    for problem in report.problems:
        click.echo(f"problem: {problem}", err=True)
    if not report.ok:
        raise _data(f"{index_path}: {len(report.problems)} problems found")
    click.echo(
        f"{index_path}: ok ({report.token_count} tokens, "
        f"sha256 {report.manifest.get('payload_sha256', '')[:12]}...)"
    )


@index_group.command("verify")
@click.argument("index_path", type=click.Path(path_type=Path))
def index_verify_cmd(index_path: Path) -> None:
    """Check file integrity and structural invariants."""
    _verify(index_path)


@cli.command("verify")
@click.argument("index_path", type=click.Path(path_type=Path))
def verify_cmd(index_path: Path) -> None:
    """Alias for `index verify`."""
    _verify(index_path)


# --- search -----------------------------------------------------------------

def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _paint(text: str, spans, color: bool) -> str:
    if not color:
        return text
    pieces = []
    for segment, hot in highlight_sentence(text, spans):
        pieces.append(f"\x1b[1;33m{segment}\x1b[0m" if hot else segment)
    return "".join(pieces)


@cli.command("search")
@click.option("--index", "index_path", required=True, type=click.Path(path_type=Path))
@click.option("--q", "query", required=True, help="Free-text phrase query.")
@click.option("--corpora", default="", help="Comma-separated corpus ids; default all.")
@click.option("--limit", default=None, type=int, help="Cards per corpus.")
@click.option("--offset", default=0, type=int)
@click.option("--json", "as_json", is_flag=True, help="Emit the HTTP API body instead of text.")
def search_cmd(index_path: Path, query: str, corpora: str, limit: int | None,
               offset: int, as_json: bool) -> None:
    """Phrase search; one section per corpus, one card per document."""
    engine = _load_engine_or_die(str(index_path))
    wanted = [c for c in corpora.split(",") if c.strip()] or None
    try:
        payload = engine.search_payload(query, wanted, limit=limit, offset=offset)
    except EmptyQueryError as exc:
        raise _usage(f"--q: {exc}") from exc
    except UnknownCorpusError as exc:
        raise _usage(str(exc)) from exc
    if as_json:
        click.echo(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
        return
    color = _use_color()
    click.echo(f"query: {payload['query']}  (lemmas: {' '.join(payload['lemmas'])})")
    for corpus_id, section in payload["corpora"].items():
        click.echo(f"\n{section['display_name']} [{corpus_id}]: "
                   f"{section['total_documents']} document(s)")
        for card in section["cards"]:
            title = card["title"] or card["doc_id"]
            click.echo(f"  {title}  ({card['doc_id']})")
            if card["url"]:
                click.echo(f"    {card['url']}")
            for sentence in card["sentences"]:
                rendered = _paint(sentence["text"], sentence["highlights"], color)
                click.echo(f"    - {rendered}")


# --- link -------------------------------------------------------------------

@cli.command("link")
@click.option("--q", "term", required=True, help="Term to look up.")
@click.option("--index", "index_path", default=None, type=click.Path(path_type=Path),
              help="Index file; enables the wiki-title panel.")
@click.option("--live", is_flag=True, help="Query the public endpoint instead of fixtures.")
@click.option("--endpoint", default=None, help="SPARQL endpoint (live mode).")
@click.option("--fixtures", "fixtures_dir", default=None, type=click.Path(path_type=Path),
              help="Extra fixture directory for replay mode.")
@click.option("--record", "record_dir", default=None, type=click.Path(path_type=Path),
              help="Record live responses as fixtures into this directory.")
@click.option("--json", "as_json", is_flag=True)
def link_cmd(term: str, index_path: Path | None, live: bool, endpoint: str | None,
             fixtures_dir: Path | None, record_dir: Path | None, as_json: bool) -> None:
    """Knowledge-base lookup. Replay mode by default: no network at all."""
    from .linker import FixtureStore, bundled_fixture_dir

    if not term.strip():
        raise _usage("--q: term is empty")
    if index_path is None:
        raise _usage("--index is required (wiki titles come from the index)")

    fixture_dirs = [bundled_fixture_dir()]
    if fixtures_dir is not None:
        fixture_dirs.insert(0, fixtures_dir)
    mode = "live" if live else "replay"
    engine = _load_engine_or_die(
        str(index_path),
        mode=mode,
        endpoint=endpoint,
        fixtures=FixtureStore(fixture_dirs),
    )
    if record_dir is not None:
        engine.client.record_dir = record_dir
    try:
        payload = engine.link_payload(term)
    except (EmptyTermError, UnescapableTermError) as exc:
        raise _usage(f"--q: {exc}") from exc
    except UpstreamFailure as exc:
        raise _env(str(exc)) from exc
    except LinkerError as exc:
        raise _env(str(exc)) from exc

    if as_json:
        click.echo(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
        return
    for warning in payload.get("warnings", ()):
        click.echo(f"note: {warning}", err=True)
    click.echo(f"wikidata ({len(payload['wikidata'])}):")
    for entry in payload["wikidata"]:
        desc = f" -- {entry['description']}" if entry["description"] else ""
        click.echo(f"  {entry['id']}  {entry['label']}{desc}")
        click.echo(f"      {entry['url']}")
    click.echo(f"nlab ({len(payload['nlab'])}):")
    for entry in payload["nlab"]:
        click.echo(f"  {entry['title']}")
        click.echo(f"      {entry['url']}")


# --- eval -------------------------------------------------------------------

_GOLD_NAMES = ("author", "titles")
_PRED_NAMES = ("textrank", "mwe")


@cli.command("eval")
@click.option("--index", "index_path", required=True, type=click.Path(path_type=Path))
@click.option("--gold", default="author",
              help="author, titles, or a path to a one-term-per-line file.")
@click.option("--pred", "preds", multiple=True,
              help="textrank, mwe, or a prediction file path; repeatable. "
                   "Default: textrank and mwe.")
@click.option("--corpus", default="tac", help="Corpus the extractors run over.")
@click.option("--json", "as_json", is_flag=True)
@click.option("--out-dir", "out_dir", default=None, type=click.Path(path_type=Path),
              help="Write report.json, report.tsv, and report.png here.")
def eval_cmd(index_path: Path, gold: str, preds: tuple[str, ...], corpus: str,
             as_json: bool, out_dir: Path | None) -> None:
    """Score term extractors against a silver standard."""
    from .report import format_table, report_json, write_report_files

    engine = _load_engine_or_die(str(index_path))
    index, store = engine.index, engine.store
    if corpus not in store.corpora:
        raise _usage(f"unknown corpus {corpus!r}; known: {', '.join(sorted(store.corpora))}")

    if gold == "author":
        standard = build_silver_author(index, store, corpus)
    elif gold == "titles":
        standard = build_silver_titles(index, store, target_corpus=corpus)
    else:
        gold_path = Path(gold)
        if not gold_path.is_file():
            raise _usage(f"--gold must be one of {_GOLD_NAMES} or an existing file, got {gold!r}")
        try:
            standard = load_predictions(gold_path, index)
        except PredictionFileError as exc:
            raise _data(f"{gold_path}: {exc}") from exc

    documents = _store_documents(index, store, corpus)
    rows = []
    for pred in preds or _PRED_NAMES:
        if pred == "textrank":
            predicted = {c.lemma_form for c in extract_textrank(documents)}
        elif pred == "mwe":
            try:
                predicted = {c.lemma_form for c in extract_mwe(documents)}
            except PatternSyntaxError as exc:
                raise _data(str(exc)) from exc
        else:
            pred_path = Path(pred)
            if not pred_path.is_file():
                raise _usage(
                    f"--pred must be one of {_PRED_NAMES} or an existing file, got {pred!r}"
                )
            try:
                predicted = load_predictions(pred_path, index)
            except PredictionFileError as exc:
                raise _data(f"{pred_path}: {exc}") from exc
            pred = pred_path.stem
        rows.append((pred, evaluate(predicted, standard)))

    if as_json:
        click.echo(json.dumps(report_json(rows), ensure_ascii=False, indent=2, sort_keys=True))
    else:
        click.echo(format_table(rows))
    if out_dir is not None:
        paths = write_report_files(rows, out_dir)
        click.echo(f"wrote {paths['json']}, {paths['tsv']}, {paths['png']}", err=True)


def _store_documents(index, store, corpus: str) -> list:
    """Rebuild lightweight documents from the store for the extractors."""
    from .corpus import AnnotatedDocument, Sentence, Token

    docs = []
    for meta in store.documents():
        if meta.corpus != corpus:
            continue
        sentences = []
        ordinal = 0
        while True:
            try:
                stored = store.sentence(meta.corpus, meta.doc_id, ordinal)
            except KeyError:
                break
            tokens = tuple(
                Token(
                    index=i + 1,
                    form=stored.text[s:e],
                    lemma=stored.lemmas[i],
                    upos=stored.upos[i],
                )
                for i, (s, e) in enumerate(stored.offsets)
            )
            sentences.append(Sentence(tokens=tokens, text_comment=stored.text))
            ordinal += 1
        docs.append(AnnotatedDocument(metadata=meta, sentences=tuple(sentences)))
    return docs


# --- serve ------------------------------------------------------------------

@cli.command("serve")
@click.option("--index", "index_path", default=None, type=click.Path(path_type=Path))
@click.option("--config", "config_path", default=None, type=click.Path(path_type=Path),
              help="JSON config file; flags and CTSEARCH_* env override it.")
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--mode", default=None, type=click.Choice(["replay", "live"]))
@click.option("--ui", "ui_dir", default=None, type=click.Path(path_type=Path),
              help="Serve this directory of static files at /.")
def serve_cmd(index_path: Path | None, config_path: Path | None, host: str | None,
              port: int | None, mode: str | None, ui_dir: Path | None) -> None:
    """Run the HTTP JSON API (uvicorn underneath)."""
    from .service import configure_logging, create_app

    try:
        config = load_config(
            config_path,
            index_path=str(index_path) if index_path else None,
            host=host,
            port=port,
            mode=mode,
        )
    except ConfigError as exc:
        raise _usage(str(exc)) from exc
    configure_logging(config.log_level)
    if not config.index_path:
        raise _usage("an index is required: pass --index or set it in the config")

    try:
        engine = Engine.from_config(config)
    except (IndexingError, OSError, ValueError) as exc:
        raise _env(f"refusing to start: {exc}") from exc

    app = create_app(config, engine=engine)
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_config=None)


# --- entry point --------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="ctsearch", standalone_mode=False)
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.code
    except click.exceptions.NoArgsIsHelpError as exc:
        click.echo(exc.format_message())
        return EXIT_OK
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_DATA
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 130
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
