"""Index build and the versioned single-file persistence."""
from __future__ import annotations

import random
import struct

import pytest

from ctsearch.index import (
    FORMAT_VERSION,
    MAGIC,
    ChecksumMismatchError,
    CorruptFileError,
    DuplicateDocIdError,
    VersionMismatchError,
    build_index,
    load_index,
    persist_index,
    read_manifest,
    verify_index,
)

from support import make_document, make_sentence, random_documents


def test_posting_lengths_sum_to_token_count(sample_index):
    index, store = sample_index
    assert index.posting_count() == store.token_count()
    for lemma, plist in index.postings.items():
        assert list(plist) == sorted(set(plist)), lemma


def test_lookup_casefolds_and_misses_cleanly(sample_index):
    index, _ = sample_index
    assert index.lookup("Category") == index.lookup("category")
    assert index.lookup("category") != ()
    assert index.lookup("no-such-lemma") == ()


def test_surface_table_from_sample(sample_index):
    index, _ = sample_index
    assert index.surface_to_lemma["categories"] == "category"
    assert index.surface_to_lemma["monads"] == "monad"


def test_surface_table_frequency_then_tie_break():
    docs = [
        make_document("d1", "tac", [
            # "leaves" twice as lemma "leaf", once as "leave":
            make_sentence([("leaves", "NOUN", "leaf")]),
            make_sentence([("leaves", "NOUN", "leaf")]),
            make_sentence([("leaves", "VERB", "leave")]),
            # tie: one of each, lexicographically smaller lemma wins
            make_sentence([("axes", "NOUN", "axis")]),
            make_sentence([("axes", "NOUN", "axe")]),
        ]),
    ]
    index, _ = build_index(docs)
    assert index.surface_to_lemma["leaves"] == "leaf"
    assert index.surface_to_lemma["axes"] == "axe"


def test_duplicate_doc_ids_rejected():
    docs = [
        make_document("dup", "tac", [make_sentence(["a"])]),
        make_document("dup", "tac", [make_sentence(["b"])]),
        make_document("other", "nlab", [make_sentence(["c"])]),
        make_document("dup", "tac", [make_sentence(["d"])]),
    ]
    with pytest.raises(DuplicateDocIdError) as err:
        build_index(docs)
    assert err.value.offenders == [("tac", "dup")]
    # Same doc_id in different corpora is fine.
    build_index([
        make_document("same", "tac", [make_sentence(["a"])]),
        make_document("same", "nlab", [make_sentence(["b"])]),
    ])


def test_text_comment_mismatch_falls_back_to_reconstruction():
    sent = make_sentence(["double", "category"], text="completely different words")
    _, store = build_index([make_document("d1", "tac", [sent])])
    stored = store.sentence("tac", "d1", 0)
    assert stored.text == "double category"
    assert stored.offsets == ((0, 6), (7, 15))


def test_offsets_point_at_forms(sample_index):
    _, store = sample_index
    for key in store.sentence_keys():
        sent = store.sentence(*key)
        assert len(sent.offsets) == len(sent.lemmas) == len(sent.upos)
        last = 0
        for start, end in sent.offsets:
            assert last <= start < end <= len(sent.text)
            last = end


def test_persist_load_round_trip(tmp_path, sample_index):
    index, store = sample_index
    path = tmp_path / "rt.idx"
    persist_index(index, store, path, built_at="2026-01-01T00:00:00Z")
    loaded_index, loaded_store = load_index(path)

    assert loaded_index.postings == index.postings
    assert loaded_index.surface_to_lemma == index.surface_to_lemma
    assert loaded_store.corpora == store.corpora
    assert list(loaded_store.corpora) == list(store.corpora)  # registration order
    assert loaded_store.documents() == store.documents()
    assert loaded_store.sentence_keys() == store.sentence_keys()
    for key in store.sentence_keys():
        assert loaded_store.sentence(*key) == store.sentence(*key)


def test_registration_order_survives_either_way(tmp_path):
    docs_tac_first = [
        make_document("t1", "tac", [make_sentence(["a"])]),
        make_document("n1", "nlab", [make_sentence(["b"])]),
    ]
    for docs, expected in ((docs_tac_first, ["tac", "nlab"]),
                           (list(reversed(docs_tac_first)), ["nlab", "tac"])):
        index, store = build_index(docs)
        path = tmp_path / f"{expected[0]}.idx"
        persist_index(index, store, path)
        _, loaded = load_index(path)
        assert list(loaded.corpora) == expected


def test_round_trip_on_random_corpora(tmp_path):
    rng = random.Random(55)
    for case in range(5):
        docs = random_documents(rng, corpus=f"c{case}", max_sentences=40)
        index, store = build_index(docs)
        path = tmp_path / f"r{case}.idx"
        persist_index(index, store, path)
        loaded_index, loaded_store = load_index(path)
        assert loaded_index.postings == index.postings
        assert loaded_store.sentence_keys() == store.sentence_keys()


def test_build_and_persist_are_deterministic(tmp_path, sample_documents):
    built = []
    for n in range(2):
        index, store = build_index(sample_documents)
        path = tmp_path / f"det{n}.idx"
        persist_index(index, store, path, built_at="2026-01-01T00:00:00Z")
        built.append(path.read_bytes())
    assert built[0] == built[1]


def test_source_date_epoch_pins_built_at(tmp_path, sample_index, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    index, store = sample_index
    manifest = persist_index(index, store, tmp_path / "e.idx")
    assert manifest["built_at"] == "2023-11-14T22:13:20+00:00"


def test_manifest_contents(tmp_path, sample_index):
    index, store = sample_index
    path = tmp_path / "m.idx"
    written = persist_index(index, store, path, built_at="2026-01-01T00:00:00Z")
    assert read_manifest(path) == written
    assert written["format_version"] == FORMAT_VERSION
    assert written["corpora"] == {"tac": "Theory and Applications of Categories", "nlab": "nLab"}
    assert written["document_counts"] == {"tac": 3, "nlab": 3}
    assert written["token_count"] == store.token_count()
    assert written["lemma_count"] == index.lemma_count()
    assert set(written["corpus_checksums"]) == {"tac", "nlab"}
    assert written["payload_bytes"] > 0


def _header_size():
    return struct.calcsize(">8sHI")


def test_version_bump_rejected(tmp_path, sample_index):
    index, store = sample_index
    path = tmp_path / "v.idx"
    persist_index(index, store, path)
    blob = bytearray(path.read_bytes())
    struct.pack_into(">H", blob, len(MAGIC), FORMAT_VERSION + 1)
    path.write_bytes(bytes(blob))
    with pytest.raises(VersionMismatchError) as err:
        load_index(path)
    assert err.value.found == FORMAT_VERSION + 1
    with pytest.raises(VersionMismatchError):
        read_manifest(path)


def test_corrupted_payload_rejected(tmp_path, sample_index):
    index, store = sample_index
    path = tmp_path / "c.idx"
    persist_index(index, store, path)
    blob = bytearray(path.read_bytes())
    blob[-1] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(ChecksumMismatchError):
        load_index(path)


def test_bad_magic_and_truncation_rejected(tmp_path, sample_index):
    index, store = sample_index
    path = tmp_path / "b.idx"
    persist_index(index, store, path)
    blob = path.read_bytes()

    not_index = tmp_path / "not.idx"
    not_index.write_bytes(b"PNG trash" + blob[9:])
    with pytest.raises(CorruptFileError):
        load_index(not_index)

    short = tmp_path / "short.idx"
    short.write_bytes(blob[:4])
    with pytest.raises(CorruptFileError):
        load_index(short)

    cut_manifest = tmp_path / "cut.idx"
    cut_manifest.write_bytes(blob[:_header_size() + 5])
    with pytest.raises(CorruptFileError):
        load_index(cut_manifest)


def test_mangled_manifest_rejected(tmp_path, sample_index):
    index, store = sample_index
    path = tmp_path / "mm.idx"
    persist_index(index, store, path)
    blob = bytearray(path.read_bytes())
    blob[_header_size()] = ord("!")  # manifest starts with '{'
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptFileError):
        load_index(path)


def test_verify_clean_index(sample_index_path):
    report = verify_index(sample_index_path)
    assert report.ok
    assert report.problems == []
    assert report.token_count == report.posting_count


def test_verify_flags_inconsistent_postings(tmp_path, sample_documents):
    index, store = build_index(sample_documents)
    lemma = "category"
    plist = index.postings[lemma]
    index.postings[lemma] = tuple(reversed(plist))  # unsorted on purpose
    path = tmp_path / "bad.idx"
    persist_index(index, store, path)
    report = verify_index(path)
    assert not report.ok
    assert any("not sorted" in p for p in report.problems)


def test_verify_flags_missing_sentence(tmp_path, sample_documents):
    from ctsearch.index import Posting

    index, store = build_index(sample_documents)
    index.postings["phantom"] = (Posting("tac", "tac-001", 999, 0),)
    path = tmp_path / "ghost.idx"
    persist_index(index, store, path)
    report = verify_index(path)
    assert any("no stored sentence" in p for p in report.problems)
