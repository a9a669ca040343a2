import dataclasses

import pytest

from wordrank.analysis import AnalyzerConfig
from wordrank.bridge import default_config, open_indexes
from wordrank.corpus import STANDARD_FIELDS, Corpus, Record, generate_synthetic
from wordrank.index import IndexFormatError, open_index, read_meta
from wordrank.indexer import RankingIndexer, indexed_fields, run_indexing


def test_run_indexing_messages_and_report(tmp_path, books_corpus, books_config):
    messages = []
    report = run_indexing(books_corpus, books_config.function, tmp_path, books_config, message=messages.append)
    assert messages == ["ranking indexer called", "4 records indexed", "ranking indexer completed"]
    assert report.records_indexed == 4
    assert set(report.stats) == set(STANDARD_FIELDS) | {"description"}
    assert report.stats["description"].distinct_terms > 0
    assert "records indexed: 4" in report.summary()
    for name in report.stats:
        assert read_meta(tmp_path, name)["state"] == "complete"


def test_indexed_fields_adds_configured_extras(books_config):
    assert indexed_fields(books_config) == [*STANDARD_FIELDS, "description"]
    assert indexed_fields(default_config()) == list(STANDARD_FIELDS)


def test_every_field_extracted(tmp_path):
    r = Record(5, abstract="quark", first_author="Ellis, J", additional_authors=("Enqvist, K",),
               keyword="susy", title="neutrino", fulltext="higgs boson")
    cfg = default_config()
    run_indexing(Corpus((r,)), cfg.function, tmp_path, cfg, message=lambda m: None)
    ixs = open_indexes(tmp_path, list(STANDARD_FIELDS))
    assert ixs["author"].match_terms(["enqvist"]) == [5]
    assert ixs["abstract"].match_terms(["quark"]) == [5]
    assert ixs["title"].match_terms(["neutrino"]) == [5]
    assert ixs["fulltext"].match_terms(["higg", "boson"], phrase=True) == [5]


def test_flush_every_gives_identical_indexes(tmp_path):
    corpus = generate_synthetic(40, 2)
    cfg = default_config()
    messages = []
    run_indexing(corpus, cfg.function, tmp_path / "once", cfg, message=lambda m: None)
    run_indexing(corpus, cfg.function, tmp_path / "each", cfg, flush_every=1, message=messages.append)
    assert messages.count("40 records indexed") == 2
    for name in STANDARD_FIELDS:
        assert open_index(tmp_path / "once", name).same_content(open_index(tmp_path / "each", name))


def test_resume_adds_to_existing_index(tmp_path):
    corpus = generate_synthetic(20, 4)
    cfg = default_config()
    run_indexing(corpus.slice(0, 10), cfg.function, tmp_path / "parts", cfg, message=lambda m: None)
    run_indexing(corpus.slice(10, 20), cfg.function, tmp_path / "parts", cfg, message=lambda m: None)
    run_indexing(corpus, cfg.function, tmp_path / "whole", cfg, message=lambda m: None)
    for name in STANDARD_FIELDS:
        assert open_index(tmp_path / "parts", name).same_content(open_index(tmp_path / "whole", name))


def test_resume_rejects_other_analyzer(tmp_path):
    cfg = default_config()
    run_indexing(generate_synthetic(3, 1), cfg.function, tmp_path, cfg, message=lambda m: None)
    other = dataclasses.replace(cfg, analyzer=AnalyzerConfig(stemming_enabled=False))
    with pytest.raises(IndexFormatError, match="analyzer"):
        RankingIndexer(tmp_path, other)
    RankingIndexer(tmp_path, other, resume=False)
