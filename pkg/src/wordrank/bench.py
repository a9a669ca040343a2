"""Scalability harness: cumulative indexing of corpus parts, optimize, timed queries."""

from __future__ import annotations

import csv
import dataclasses
import gc
import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .bridge import RankMethodConfig, default_config, get_method, prepare_units, rank
from .corpus import Corpus
from .index import FieldIndex, index_bytes, open_index, optimize
from .indexer import RankingIndexer
from .rank_vsm import match_units

TERM_QUERIES = ("of", "model", "boson")
PHRASE_QUERIES = ("of the", "phys rev", "standard model", "higgs boson")
CSV_COLUMNS = (
    "cumulative_records",
    "index_seconds",
    "index_bytes",
    "query",
    "kind",
    "result_count",
    "search_ms",
    "rank_ms",
)


class BenchPlanError(ValueError):
    pass


@dataclass(frozen=True)
class BenchPlan:
    parts: int = 8
    part_size: int = 1000
    term_queries: tuple[str, ...] = TERM_QUERIES
    phrase_queries: tuple[str, ...] = PHRASE_QUERIES
    repetitions: int = 5

    def __post_init__(self) -> None:
        if self.parts < 1:
            raise BenchPlanError("parts must be >= 1")
        if self.part_size < 1:
            raise BenchPlanError("part_size must be >= 1")
        if self.repetitions < 3:
            raise BenchPlanError("repetitions must be >= 3")

    def queries(self) -> list[tuple[str, str]]:
        return [(q, "term") for q in self.term_queries] + [(q, "phrase") for q in self.phrase_queries]


@dataclass
class QueryTiming:
    query: str
    kind: str
    result_count: int
    search_ms: float
    rank_ms: float
    search_ms_cold: float
    rank_ms_cold: float


@dataclass
class BenchRow:
    cumulative_records: int
    index_seconds: float
    index_bytes: int
    queries: list[QueryTiming] = field(default_factory=list)

    def query(self, text: str) -> QueryTiming:
        for q in self.queries:
            if q.query == text:
                return q
        raise KeyError(text)


def _batch_ms(fn: Callable[[], object], loops: int) -> float:
    start = time.perf_counter()
    for _ in range(loops):
        fn()
    return (time.perf_counter() - start) * 1000.0 / loops


def _loops_for(cold_ms: float, min_batch_ms: float) -> int:
    return max(1, math.ceil(min_batch_ms / cold_ms)) if cold_ms > 0 else 1


def query_text(query: str, kind: str) -> str:
    return f'"{query}"' if kind == "phrase" else query


def _time_query(
    snapshots: list[dict[str, FieldIndex]],
    cfg: RankMethodConfig,
    text: str,
    repetitions: int,
    min_batch_ms: float,
) -> list[tuple[int, float, float, float, float]]:
    """Per snapshot: (result count, warm search ms, warm rank ms, cold search ms, cold rank ms).

    Cold figures are the first call against each snapshot. Warm figures follow
    the ``timeit`` convention (fastest of ``repetitions`` batches, per call).
    Repetitions run round-robin across snapshots so that slow periods on the
    machine affect every corpus size alike instead of biasing one of them.
    """
    units = prepare_units(cfg, text, "fulltext")
    plans = []
    for indexes in snapshots:
        search = lambda ix=indexes: match_units(ix, units)
        start = time.perf_counter()
        hitset = search()
        s_cold = (time.perf_counter() - start) * 1000.0
        ranker = lambda ix=indexes, h=hitset: rank(cfg, text, h, ix, "fulltext")
        start = time.perf_counter()
        ranker()
        r_cold = (time.perf_counter() - start) * 1000.0
        plans.append([len(hitset), search, ranker, s_cold, r_cold,
                      _loops_for(s_cold, min_batch_ms), _loops_for(r_cold, min_batch_ms),
                      math.inf, math.inf])

    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(repetitions):
            for p in plans:
                p[7] = min(p[7], _batch_ms(p[1], p[5]))
                p[8] = min(p[8], _batch_ms(p[2], p[6]))
    finally:
        if gc_was_enabled:
            gc.enable()
    return [(p[0], p[7], p[8], p[3], p[4]) for p in plans]


def run_bench(
    corpus: Corpus,
    plan: BenchPlan,
    engine: str,
    out: str | Path | None = None,
    cfg: RankMethodConfig | None = None,
    index_root: str | Path | None = None,
    message: Callable[[str], None] = lambda msg: None,
    min_batch_ms: float = 20.0,
) -> list[BenchRow]:
    """Index ``plan.parts`` consecutive slices of ``corpus`` and measure each step.

    After every part the indexes are optimized and reopened; the reopened
    query fields are kept as a snapshot so the query timings can be taken
    once all parts are indexed.
    """
    get_method(engine)
    needed = plan.parts * plan.part_size
    if len(corpus) < needed:
        raise BenchPlanError(f"plan needs {needed} records, corpus has {len(corpus)}")
    cfg = dataclasses.replace(cfg or default_config(engine), function=engine)
    query_fields = {
        u.field for q, kind in plan.queries() for u in prepare_units(cfg, query_text(q, kind), "fulltext")
    }

    rows: list[BenchRow] = []
    snapshots: list[dict[str, FieldIndex]] = []
    with tempfile.TemporaryDirectory(prefix="wordrank-bench-") as tmp:
        root = Path(index_root) if index_root is not None else Path(tmp)
        indexer = RankingIndexer(root, cfg, resume=False)
        index_seconds = 0.0
        for part in range(plan.parts):
            piece = corpus.slice(part * plan.part_size, (part + 1) * plan.part_size)
            start = time.perf_counter()
            indexer.add_corpus(piece)
            indexer.flush()
            index_seconds += time.perf_counter() - start

            for name in indexer.fields:
                optimize(root, name)
            size = sum(index_bytes(root, name) for name in indexer.fields)
            snapshots.append({name: open_index(root, name) for name in query_fields})
            cumulative = (part + 1) * plan.part_size
            rows.append(BenchRow(cumulative, index_seconds, size))
            message(
                f"part {part + 1}/{plan.parts}: {cumulative} records, "
                f"{index_seconds:.2f} s indexing, {size} bytes"
            )

    for q, kind in plan.queries():
        timings = _time_query(snapshots, cfg, query_text(q, kind), plan.repetitions, min_batch_ms)
        for row, (count, s_warm, r_warm, s_cold, r_cold) in zip(rows, timings):
            row.queries.append(QueryTiming(q, kind, count, s_warm, r_warm, s_cold, r_cold))
        message(f"timed {kind} query {q!r}")

    if out is not None:
        write_csv(rows, out)
    return rows


def write_csv(rows: list[BenchRow], out: str | Path) -> None:
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            for q in row.queries:
                writer.writerow([
                    row.cumulative_records,
                    f"{row.index_seconds:.6f}",
                    row.index_bytes,
                    q.query,
                    q.kind,
                    q.result_count,
                    f"{q.search_ms:.6f}",
                    f"{q.rank_ms:.6f}",
                ])


def _metric(row: BenchRow, metric: str) -> float:
    if ":" in metric:
        name, query = metric.split(":", 1)
        return float(getattr(row.query(query), name))
    return float(getattr(row, metric))


def fit_linear(rows: list[BenchRow], metric: str) -> tuple[float, float, float]:
    """Least squares of ``metric`` against cumulative records: (slope, intercept, r2).

    ``metric`` is a row attribute (``index_seconds``, ``index_bytes``) or
    ``<attribute>:<query>`` for per-query values, e.g. ``rank_ms:boson``.
    """
    if len(rows) < 3:
        raise ValueError("fit_linear needs at least 3 rows")
    xs = [float(r.cumulative_records) for r in rows]
    ys = [_metric(r, metric) for r in rows]
    return _ols(xs, ys)


def _ols(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("cumulative_records must vary")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_tot = sum((y - my) ** 2 for y in ys)
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2
