from __future__ import annotations

from pathlib import Path

import pytest

from ctsearch.index import build_index, persist_index

from support import load_sample_documents


@pytest.fixture(scope="session")
def sample_documents():
    return load_sample_documents()


@pytest.fixture(scope="session")
def sample_index(sample_documents):
    """(LemmaIndex, SentenceStore) over the bundled sample corpora."""
    return build_index(sample_documents)


@pytest.fixture(scope="session")
def sample_index_path(sample_index, tmp_path_factory) -> Path:
    index, store = sample_index
    path = tmp_path_factory.mktemp("idx") / "sample.idx"
    persist_index(index, store, path, built_at="2026-01-01T00:00:00Z")
    return path
