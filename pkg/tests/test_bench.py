import csv

import pytest

from wordrank.bench import CSV_COLUMNS, BenchPlan, BenchPlanError, BenchRow, fit_linear, run_bench
from wordrank.corpus import generate_synthetic


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench") / "bench.csv"
    corpus = generate_synthetic(300, 8)
    rows = run_bench(corpus, BenchPlan(parts=3, part_size=100, repetitions=3), "word_similarity_perfield", out,
                     min_batch_ms=1.0)
    return rows, out


def test_plan_validation():
    for kwargs in ({"parts": 0}, {"part_size": 0}, {"repetitions": 2}):
        with pytest.raises(BenchPlanError):
            BenchPlan(**kwargs)
    assert len(BenchPlan().queries()) == 7


def test_plan_larger_than_corpus():
    with pytest.raises(BenchPlanError):
        run_bench(generate_synthetic(10, 1), BenchPlan(parts=2, part_size=10), "word_similarity_unified")


def test_rows_and_csv(small_run):
    rows, out = small_run
    assert [r.cumulative_records for r in rows] == [100, 200, 300]
    assert all(a.index_seconds < b.index_seconds for a, b in zip(rows, rows[1:]))
    assert all(a.index_bytes < b.index_bytes for a, b in zip(rows, rows[1:]))
    with open(out, newline="") as fh:
        table = list(csv.reader(fh))
    assert tuple(table[0]) == CSV_COLUMNS
    assert len(table) == 1 + 3 * 7
    assert {line[4] for line in table[1:]} == {"term", "phrase"}


def test_result_counts_are_cumulative(small_run):
    rows, _ = small_run
    # every synthetic fulltext has "of"
    assert [r.query("of").result_count for r in rows] == [100, 200, 300]
    for q in ("model", "boson", "of the", "higgs boson"):
        counts = [r.query(q).result_count for r in rows]
        assert counts == sorted(counts)
    with pytest.raises(KeyError):
        rows[0].query("absent")


def test_result_counts_deterministic(small_run):
    rows, _ = small_run
    again = run_bench(generate_synthetic(300, 8), BenchPlan(parts=3, part_size=100, repetitions=3),
                      "word_similarity_perfield", min_batch_ms=1.0)
    assert [[q.result_count for q in r.queries] for r in rows] == [[q.result_count for q in r.queries] for r in again]


def rows_from(xs, ys):
    return [BenchRow(x, y, 0) for x, y in zip(xs, ys)]


def test_fit_linear():
    slope, intercept, r2 = fit_linear(rows_from([1, 2, 3, 4], [3, 5, 7, 9]), "index_seconds")
    assert (slope, intercept, r2) == pytest.approx((2.0, 1.0, 1.0))
    assert fit_linear(rows_from([1, 2, 3], [4, 4, 4]), "index_seconds") == pytest.approx((0.0, 4.0, 1.0))
    _, _, noisy = fit_linear(rows_from([1, 2, 3, 4, 5], [1, 5, 2, 6, 1]), "index_seconds")
    assert 0 <= noisy < 0.5
    with pytest.raises(ValueError):
        fit_linear(rows_from([1, 2], [1, 2]), "index_seconds")
    with pytest.raises(ValueError):
        fit_linear(rows_from([1, 1, 1], [1, 2, 3]), "index_seconds")


def test_fit_per_query_metric(small_run):
    rows, _ = small_run
    slope, _, r2 = fit_linear(rows, "result_count:of")
    assert slope == pytest.approx(1.0) and r2 == pytest.approx(1.0)
