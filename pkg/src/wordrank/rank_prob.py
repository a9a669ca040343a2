"""Per-field engine: one BM25 query per search unit, merged by OR with exclusions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .analysis import analyze
from .idset import IdSet
from .index import FieldIndex, UnknownFieldError
from .query import PHRASE, FieldSettings, SearchUnit

BM25_K1 = 1.2
BM25_B = 1.0

Hit = tuple[int, int]


@dataclass
class UnitResult:
    hits: list[Hit] = field(default_factory=list)
    matched: IdSet = field(default_factory=IdSet)


def bm25_idf(df: int, n_docs: int) -> float:
    return math.log((n_docs - df + 0.5) / (df + 0.5) + 1.0)


def bm25_scores(
    ix: FieldIndex, terms: list[str], recids: Iterable[int], k1: float = BM25_K1, b: float = BM25_B
) -> dict[int, float]:
    n = ix.doc_count
    avgdl = ix.avg_doc_len or 1.0
    forward = ix.term_postings
    doc_len = ix.doc_len
    distinct = list(dict.fromkeys(terms))
    idf = {t: bm25_idf(len(forward[t]), n) for t in distinct if t in forward}
    scores = {}
    for recid in recids:
        norm = k1 * (1.0 - b + b * doc_len[recid] / avgdl)
        total = 0.0
        for t, w in idf.items():
            positions = forward[t].get(recid)
            if positions:
                tf = len(positions)
                total += w * tf * (k1 + 1.0) / (tf + norm)
        scores[recid] = total
    return scores


def query_field(
    ix: FieldIndex,
    pattern: str,
    kind: str,
    weight: int,
    candidates: IdSet,
    max_recid: int,
    k1: float = BM25_K1,
    b: float = BM25_B,
) -> UnitResult:
    """Match ``pattern`` in one field and score the candidates that match.

    Hits carry ``percent * weight`` where the best matching candidate has
    percent 100. Multi-term patterns require every term (consecutive for
    phrases).
    """
    if weight < 1:
        raise ValueError("weight must be >= 1")
    terms = analyze(pattern, ix.analyzer)
    found = [
        recid
        for recid in ix.match_terms(terms, phrase=kind == PHRASE)
        if recid <= max_recid and recid in candidates
    ]
    if not found:
        return UnitResult()
    scores = bm25_scores(ix, terms, found, k1, b)
    best = max(scores.values())
    order = sorted(found, key=lambda r: (-scores[r], r))
    hits = []
    for recid in order:
        percent = round(100 * scores[recid] / best) if best > 0 else 100
        hits.append((recid, int(percent) * weight))
    return UnitResult(hits, IdSet.from_sorted(found))


UnitRunner = Callable[[SearchUnit, int], UnitResult]


def evaluate_units(
    units: list[SearchUnit],
    settings: FieldSettings,
    indexes: Mapping[str, FieldIndex] | None,
    candidates: IdSet,
    max_recid: int,
    run_unit: UnitRunner | None = None,
    k1: float = BM25_K1,
    b: float = BM25_B,
) -> tuple[list[Hit], IdSet, IdSet]:
    """Run every unit; ``+`` and ``|`` both aggregate, ``-`` only collects ids to exclude.

    ``run_unit`` replaces the per-field query, e.g. to feed fixed unit results.
    """
    if run_unit is None:
        if indexes is None:
            raise ValueError("indexes are required without a custom unit runner")

        def run_unit(unit: SearchUnit, weight: int) -> UnitResult:
            if unit.field not in indexes:
                raise UnknownFieldError(unit.field)
            return query_field(
                indexes[unit.field], unit.pattern, unit.kind, weight, candidates, max_recid, k1, b
            )

    all_hits: list[Hit] = []
    included = IdSet()
    excluded = IdSet()
    for unit in units:
        result = run_unit(unit, settings.weights[unit.field])
        if unit.operator == "-":
            excluded = excluded | result.matched
        else:
            all_hits.extend(result.hits)
            included = included | result.matched
    return all_hits, included, excluded


def exclude(hits: list[Hit], excluded: IdSet) -> list[Hit]:
    return [(recid, score) for recid, score in hits if recid not in excluded]


def greatest_ranked(hits: list[Hit]) -> list[Hit]:
    """One entry per record id, keeping its greatest score; first-seen order."""
    best: dict[int, int] = {}
    for recid, score in hits:
        if recid not in best or score > best[recid]:
            best[recid] = score
    return list(best.items())


def word_similarity_perfield(
    units: list[SearchUnit],
    hitset: IdSet,
    settings: FieldSettings,
    params: Mapping[str, object],
    indexes: Mapping[str, FieldIndex],
    run_unit: UnitRunner | None = None,
) -> tuple[list[Hit], str]:
    """Engine entry point: deduplicated, exclusion-filtered hits and diagnostics."""
    max_recid = max((max(ix.doc_len, default=0) for ix in indexes.values()), default=0)
    if not max_recid and hitset:
        max_recid = hitset.max()
    k1 = float(params.get("bm25_k1", BM25_K1))
    b = float(params.get("bm25_b", BM25_B))
    all_hits, included, excluded = evaluate_units(
        units, settings, indexes, hitset, max_recid, run_unit, k1, b
    )
    ranked = greatest_ranked(exclude(all_hits, excluded))
    voutput = (
        f"perfield units: {len(units)}; included {len(included)}, excluded {len(excluded)}, "
        f"ranked {len(ranked)}\n"
    )
    return ranked, voutput

