import random

import pytest
from hypothesis import given, strategies as st

from wordrank.analysis import AnalyzerConfig, analyze
from wordrank.idset import IdSet
from wordrank.index import FieldIndex, UnknownFieldError
from wordrank.query import PHRASE, WORD, FieldSettings, SearchUnit
from wordrank.rank_prob import (
    UnitResult,
    bm25_scores,
    evaluate_units,
    exclude,
    greatest_ranked,
    query_field,
    word_similarity_perfield,
)
from wordrank.rank_vsm import match_units
from oracles import bm25_oracle

FIG26_SETTINGS = FieldSettings({"fulltext": 10, "title": 2}, "fulltext")
FIG26_UNITS = [
    SearchUnit("+", "FOR NUCLEAR", "fulltext", PHRASE),
    SearchUnit("|", "neutrino", "title"),
    SearchUnit("-", "2002", "fulltext"),
    SearchUnit("+", "at", "title"),
]
FIG26_RESULTS = {
    "FOR NUCLEAR": [(3, 10), (31, 20)],
    "neutrino": [(31, 40), (20, 30), (4, 5)],
    "2002": [(3, 30), (7, 2)],
    "at": [(7, 5)],
}


def fig26_runner(unit, weight):
    hits = FIG26_RESULTS[unit.pattern]
    return UnitResult(list(hits), IdSet(r for r, _ in hits))


def field_index(name, docs):
    ix = FieldIndex(name)
    for recid, text in docs.items():
        ix.add_document(recid, text)
    return ix


def test_fig26_evaluate_units():
    all_hits, included, excluded = evaluate_units(
        FIG26_UNITS, FIG26_SETTINGS, None, IdSet(), 0, run_unit=fig26_runner
    )
    assert all_hits == [(3, 10), (31, 20), (31, 40), (20, 30), (4, 5), (7, 5)]
    assert list(excluded) == [3, 7]
    assert list(included) == [3, 4, 7, 20, 31]
    assert sorted(greatest_ranked(exclude(all_hits, excluded))) == [(4, 5), (20, 30), (31, 40)]


def test_fig26_through_engine_entry_point():
    ranked, voutput = word_similarity_perfield(
        FIG26_UNITS, IdSet([3, 4, 7, 20, 31, 99]), FIG26_SETTINGS, {}, {}, run_unit=fig26_runner
    )
    assert ranked == [(31, 40), (20, 30), (4, 5)]
    assert "excluded 2" in voutput


def test_evaluate_units_trivial_cases():
    assert evaluate_units([], FIG26_SETTINGS, None, IdSet(), 0, run_unit=fig26_runner) == ([], IdSet(), IdSet())
    negated = [SearchUnit("-", "2002", "fulltext")]
    hits, included, excluded = evaluate_units(negated, FIG26_SETTINGS, None, IdSet(), 0, run_unit=fig26_runner)
    assert hits == [] and not included and list(excluded) == [3, 7]
    with pytest.raises(ValueError):
        evaluate_units(negated, FIG26_SETTINGS, None, IdSet(), 0)
    with pytest.raises(UnknownFieldError):
        evaluate_units(negated, FIG26_SETTINGS, {}, IdSet([3]), 10)


def test_runner_receives_configured_weight():
    seen = []

    def runner(unit, weight):
        seen.append((unit.field, weight))
        return UnitResult()

    evaluate_units(FIG26_UNITS, FIG26_SETTINGS, None, IdSet(), 0, run_unit=runner)
    assert seen == [("fulltext", 10), ("title", 2), ("fulltext", 10), ("title", 2)]


def test_greatest_ranked_examples():
    assert greatest_ranked([(31, 20), (31, 40), (20, 30), (4, 5)]) == [(31, 40), (20, 30), (4, 5)]
    assert greatest_ranked([]) == []
    assert greatest_ranked([(1, 5), (1, 5)]) == [(1, 5)]


hit_lists = st.lists(st.tuples(st.integers(1, 30), st.integers(0, 1000)), max_size=40)


@given(hit_lists)
def test_greatest_ranked_idempotent_and_order_insensitive(hits):
    once = greatest_ranked(hits)
    assert greatest_ranked(once) == once
    assert sorted(greatest_ranked(list(reversed(hits)))) == sorted(once)
    best = {}
    for r, s in hits:
        best[r] = max(s, best.get(r, s))
    assert dict(once) == best


@given(hit_lists, st.sets(st.integers(1, 30)))
def test_pipeline_drops_excluded_and_duplicates(hits, excluded):
    out = greatest_ranked(exclude(hits, IdSet(excluded)))
    ids = [r for r, _ in out]
    assert len(ids) == len(set(ids))
    assert not set(ids) & excluded


def test_query_field_examples(books_indexes):
    ix = books_indexes["description"]
    everyone = IdSet([1, 2, 3, 4])
    assert query_field(ix, "zebra", WORD, 1, everyone, 4) == UnitResult()
    single = query_field(ix, "java", WORD, 3, IdSet([3]), 4)
    assert single.hits == [(3, 300)] and list(single.matched) == [3]
    both = query_field(ix, "java programmers", WORD, 1, everyone, 4)
    assert [r for r, _ in both.hits] == [1, 2, 3]
    assert both.hits[0][1] == 100
    assert all(0 <= s <= 100 for _, s in both.hits)
    with pytest.raises(ValueError):
        query_field(ix, "java", WORD, 0, everyone, 4)


def test_query_field_respects_max_recid_and_candidates(books_indexes):
    ix = books_indexes["description"]
    res = query_field(ix, "java", WORD, 1, IdSet([1, 2, 3]), 2)
    assert list(res.matched) == [1, 2]
    assert {r for r, _ in res.hits} <= set(res.matched)


def test_query_field_phrase():
    ix = field_index("f", {1: "higgs boson found", 2: "boson higgs", 3: "the higgs and the boson"})
    res = query_field(ix, "higgs boson", PHRASE, 1, IdSet([1, 2, 3]), 3)
    assert list(res.matched) == [1]
    assert res.hits == [(1, 100)]


@pytest.mark.parametrize("seed", range(6))
def test_bm25_matches_oracle(seed):
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(15)]
    docs = {d: " ".join(rng.choices(vocab, k=rng.randint(1, 30))) for d in range(1, 80)}
    ix = field_index("f", docs)
    tokens = {d: analyze(t, AnalyzerConfig()) for d, t in docs.items()}
    q = rng.sample(vocab, 2)
    for b in (0.75, 1.0):
        got = bm25_scores(ix, q, docs, k1=1.2, b=b)
        want = bm25_oracle(tokens, q, k1=1.2, b=b)
        for d in docs:
            assert got[d] == pytest.approx(want[d], abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_conjunctive_single_field_matches_unified_engine(seed):
    rng = random.Random(50 + seed)
    vocab = [f"w{i}" for i in range(8)]
    docs = {d: " ".join(rng.choices(vocab, k=rng.randint(1, 12))) for d in range(1, 150)}
    ix = field_index("f", docs)
    pattern = " ".join(rng.sample(vocab, 2))
    unit = SearchUnit("+", pattern, "f")
    unified = match_units({"f": ix}, [unit])
    perfield = query_field(ix, pattern, WORD, 1, IdSet(docs), max(docs))
    assert perfield.matched == unified
    settings = FieldSettings({"f": 1}, "f")
    ranked, _ = word_similarity_perfield([unit], unified, settings, {}, {"f": ix})
    assert IdSet(r for r, _ in ranked) == unified


def test_engine_reads_bm25_params():
    ix = field_index("f", {1: "a b c d e f a", 2: "a", 3: "b"})
    settings = FieldSettings({"f": 1}, "f")
    unit = [SearchUnit("+", "a", "f")]
    default, _ = word_similarity_perfield(unit, IdSet([1, 2]), settings, {}, {"f": ix})
    flat, _ = word_similarity_perfield(unit, IdSet([1, 2]), settings, {"bm25_b": 0.0}, {"f": ix})
    # without length normalization the repeated term wins
    assert default[0][0] == 2 and flat[0][0] == 1
