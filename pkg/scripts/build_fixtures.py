#!/usr/bin/env python3
"""Regenerate the bundled replay fixtures under src/ctsearch/fixtures/.

The recorded query texts come from build_sparql itself, so replay-mode
lookups match by construction. Response bodies are hand-maintained
SPARQL JSON in the standard bindings shape. Run from the repo root:

    python scripts/build_fixtures.py
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ctsearch.linker import (  # noqa: E402
    DEFAULT_FILTERS,
    EMPTY_FILTERS,
    FixtureStore,
    build_sparql,
)

FIXTURE_DIR = ROOT / "src" / "ctsearch" / "fixtures"

ENTITY_PREFIX = "http://www.wikidata.org/entity/"


def binding(entity_id: str, label: str, description: str | None) -> dict:
    row = {
        "item": {"type": "uri", "value": ENTITY_PREFIX + entity_id},
        "itemLabel": {"xml:lang": "en", "type": "literal", "value": label},
    }
    if description is not None:
        row["itemDescription"] = {"xml:lang": "en", "type": "literal", "value": description}
    return row


def body(rows: list[dict]) -> str:
    payload = {
        "head": {"vars": ["item", "itemLabel", "itemDescription"]},
        "results": {"bindings": rows},
    }
    return json.dumps(payload, ensure_ascii=False, indent=1)


# All entities carrying the label or alias "category", in endpoint order.
CATEGORY_ROWS = [
    ("Q15846545", "category", "class of sets"),
    ("P910", "topic's main category", "main Wikimedia category"),
    ("Q4167836", "Wikimedia category", "use with 'instance of' (P31) for Wikimedia category"),
    ("Q21146257", "type", "kind or variety of something"),
    ("Q15013692", "Category:Rhaba", "Wikimedia category"),
    ("Q9757078", "category", "Wikimedia category"),
    (
        "Q719395",
        "category",
        "algebraic structure of objects and morphisms between objects, "
        "which can be associatively composed if the (co)domains agree",
    ),
    (
        "Q4118499",
        "category",
        "in Kantian philosophy, a pure concept of the understanding (Verstand); "
        "a characteristic of the appearance of any object in general, "
        "before it has been experienced",
    ),
    ("Q16781549", "Category:Biographical plays about English royalty", "Wikimedia category"),
    ("Q64549097", "category", "concept"),
]

# Entities whose recorded immediate class (P279, and P31 where noted)
# is the Wikimedia-category class Q4167836; the server-side MINUS
# clauses remove exactly these from the filtered response.
WIKIMEDIA_PAGES = {"Q9757078", "Q15013692", "Q16781549"}

SUBCLASS_RELATIONS = {
    entity: {"p279": ["Q4167836"], "p31": ["Q4167836"]} for entity in sorted(WIKIMEDIA_PAGES)
}


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for stale in FIXTURE_DIR.glob("wd-*.json"):
        stale.unlink()
    store = FixtureStore([FIXTURE_DIR])

    unfiltered = build_sparql("category", EMPTY_FILTERS)
    rows = [binding(*row) for row in CATEGORY_ROWS]
    path = store.record(unfiltered.text, 200, body(rows), FIXTURE_DIR)
    print(f"{path.name}: category, unfiltered, {len(rows)} rows")

    filtered = build_sparql("category", DEFAULT_FILTERS)
    kept = [binding(*row) for row in CATEGORY_ROWS if row[0] not in WIKIMEDIA_PAGES]
    path = store.record(filtered.text, 200, body(kept), FIXTURE_DIR)
    print(f"{path.name}: category, filtered, {len(kept)} rows")

    double = build_sparql("double category", DEFAULT_FILTERS)
    rows = [binding("Q99613675", "double category", None)]
    path = store.record(double.text, 200, body(rows), FIXTURE_DIR)
    print(f"{path.name}: double category, filtered, {len(rows)} rows")

    relations_path = FIXTURE_DIR / "subclass_relations.json"
    relations_path.write_text(
        json.dumps(SUBCLASS_RELATIONS, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"{relations_path.name}: {len(SUBCLASS_RELATIONS)} entities")


if __name__ == "__main__":
    main()
