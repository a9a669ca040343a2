"""Unified engine: whole-query boolean evaluation plus weighted tf-idf cosine scoring.

All fields share one query. Each positive query part contributes
``part_weight * cosine(document field vector, part vector)`` where document
term weights are ``(1 + ln tf) * ln(N / df)`` and every distinct query term has
weight 1.
"""

from __future__ import annotations

import heapq
import math
import weakref
from dataclasses import dataclass
from typing import Iterable, Mapping

from .analysis import analyze
from .idset import IdSet
from .index import FieldIndex, UnknownFieldError
from .query import PHRASE, FieldSettings, SearchUnit, parse_weighted, render_weighted

DEFAULT_ROWS = 10


class WeightedVector(dict):
    """term -> weight mapping that never stores zero weights."""

    def __init__(self, entries: Mapping[str, float] | Iterable[tuple[str, float]] = ()) -> None:
        super().__init__()
        items = entries.items() if isinstance(entries, Mapping) else entries
        for term, weight in items:
            if weight < 0:
                raise ValueError(f"negative weight for {term!r}")
            if weight:
                self[term] = float(weight)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.values()))


@dataclass(frozen=True)
class RawHit:
    recid: int
    raw_score: float


def cosine(record: Mapping[str, float], query: Mapping[str, float]) -> float:
    """Cosine over the dimensions present in both vectors.

    Both norms are taken over the shared terms only, so vectors without
    common terms score 0.
    """
    common = [t for t in record if t in query and record[t] and query[t]]
    if not common:
        return 0.0
    dot = sum(record[t] * query[t] for t in common)
    rnorm = math.sqrt(sum(record[t] ** 2 for t in common))
    qnorm = math.sqrt(sum(query[t] ** 2 for t in common))
    return min(1.0, dot / (rnorm * qnorm))


def to_integer_score(raw: float) -> int:
    if raw < 0:
        raise ValueError("raw scores must be non-negative")
    return math.floor(raw * 100) + 1


# -- term weighting ---------------------------------------------------------------

_norm_cache: "weakref.WeakKeyDictionary[FieldIndex, tuple[int, dict[int, float]]]" = (
    weakref.WeakKeyDictionary()
)


def term_weight(tf: int, df: int, n_docs: int) -> float:
    if tf <= 0 or df <= 0:
        return 0.0
    return (1.0 + math.log(tf)) * math.log(n_docs / df)


def document_norms(ix: FieldIndex) -> dict[int, float]:
    """Euclidean length of every document's tf-idf vector; cached per index version."""
    cached = _norm_cache.get(ix)
    if cached is not None and cached[0] == ix.version:
        return cached[1]
    n = ix.doc_count
    idf = {t: math.log(n / len(by_doc)) for t, by_doc in ix.term_postings.items()}
    norms = {}
    for recid, terms in ix.doc_terms.items():
        total = 0.0
        for t, tf in terms.items():
            w = (1.0 + math.log(tf)) * idf[t]
            total += w * w
        norms[recid] = math.sqrt(total)
    _norm_cache[ix] = (ix.version, norms)
    return norms


def document_vector(ix: FieldIndex, recid: int) -> WeightedVector:
    n = ix.doc_count
    return WeightedVector(
        (t, term_weight(tf, ix.df(t), n)) for t, tf in ix.doc_terms.get(recid, {}).items()
    )


# -- boolean layer ----------------------------------------------------------------


def unit_terms(ix: FieldIndex, unit: SearchUnit) -> list[str]:
    return analyze(unit.pattern, ix.analyzer)


def unit_matches(ix: FieldIndex, unit: SearchUnit) -> list[int]:
    return ix.match_terms(unit_terms(ix, unit), phrase=unit.kind == PHRASE)


def _index_for(indexes: Mapping[str, FieldIndex], field: str) -> FieldIndex:
    try:
        return indexes[field]
    except KeyError:
        raise UnknownFieldError(field) from None


def match_units(indexes: Mapping[str, FieldIndex], units: list[SearchUnit]) -> IdSet:
    """Boolean evaluation of search units over full indexes.

    ``+``/``|`` parts are combined left to right (AND/OR); the union of all
    ``-`` parts is subtracted at the end. A query with no positive part
    matches nothing.
    """
    acc: IdSet | None = None
    excluded = IdSet()
    for unit in units:
        found = IdSet.from_sorted(unit_matches(_index_for(indexes, unit.field), unit))
        if unit.operator == "-":
            excluded = excluded | found
        elif acc is None:
            acc = found
        elif unit.operator == "+":
            acc = acc & found
        else:
            acc = acc | found
    if acc is None:
        return IdSet()
    return acc - excluded


def score_documents(
    indexes: Mapping[str, FieldIndex],
    rendered_query: str,
    candidates: IdSet,
    rows: int = DEFAULT_ROWS,
) -> list[RawHit]:
    """Evaluate a weighted query; keep the top ``rows`` hits, then drop non-candidates."""
    parts = parse_weighted(rendered_query)
    units = [u for u, _ in parts]
    for u in units:
        _index_for(indexes, u.field)
    matched = match_units(indexes, units)
    if not matched:
        return []

    scores = dict.fromkeys(matched, 0.0)
    for unit, weight in parts:
        if unit.operator == "-":
            continue
        ix = indexes[unit.field]
        terms = list(dict.fromkeys(unit_terms(ix, unit)))
        if not terms:
            continue
        n = ix.doc_count
        idf = [math.log(n / ix.df(t)) if ix.df(t) else 0.0 for t in terms]
        norms = document_norms(ix)
        qnorm = math.sqrt(len(terms))
        forward = ix.term_postings
        for recid in unit_matches(ix, unit):
            if recid not in scores:
                continue
            dnorm = norms[recid]
            if dnorm == 0.0:
                continue
            dot = 0.0
            for t, w_idf in zip(terms, idf):
                dot += (1.0 + math.log(len(forward[t][recid]))) * w_idf
            scores[recid] += weight * dot / (dnorm * qnorm)

    ranked = heapq.nsmallest(rows, scores.items(), key=lambda item: (-item[1], item[0]))
    return [RawHit(recid, score) for recid, score in ranked if recid in candidates]


def word_similarity_unified(
    units: list[SearchUnit],
    hitset: IdSet,
    settings: FieldSettings,
    params: Mapping[str, object],
    indexes: Mapping[str, FieldIndex],
) -> tuple[list[tuple[int, int]], str]:
    """Engine entry point: ranked ``(recid, integer score)`` pairs and diagnostics."""
    query = render_weighted(units, settings)
    rows = int(params.get("rows", DEFAULT_ROWS))
    hits = score_documents(indexes, query, hitset, rows)
    ranked = [(h.recid, to_integer_score(h.raw_score)) for h in hits]
    return ranked, f"unified query: {query}\nranked {len(ranked)} of {len(hitset)} hits\n"
