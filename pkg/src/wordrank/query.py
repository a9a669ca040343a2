"""Invenio-style query strings: parsing into search units and weighted rendering."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Mapping

BOOLEAN_EQUIVALENTS = {"+": "AND", "|": "OR", "-": "NOT"}
TEXTUAL_OPERATORS = {v: k for k, v in BOOLEAN_EQUIVALENTS.items()}

WORD = "word"
PHRASE = "phrase"

_FIELD_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*):")
_WEIGHT_RE = re.compile(r"\^(\d+)$")


class QueryParseError(ValueError):
    pass


@dataclass(frozen=True)
class SearchUnit:
    operator: str
    pattern: str
    field: str
    kind: str = WORD

    def __post_init__(self) -> None:
        if self.operator not in BOOLEAN_EQUIVALENTS:
            raise ValueError(f"unknown operator {self.operator!r}")
        if not self.pattern:
            raise ValueError("search unit pattern must be non-empty")
        if self.kind not in (WORD, PHRASE):
            raise ValueError(f"unknown unit kind {self.kind!r}")


@dataclass(frozen=True)
class FieldSettings:
    weights: Mapping[str, int]
    default_field: str
    prologue: str = ""
    epilogue: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", dict(self.weights))
        if not self.weights:
            raise ValueError("field settings need at least one field")
        for name, weight in self.weights.items():
            if not isinstance(weight, int) or isinstance(weight, bool) or weight < 1:
                raise ValueError(f"weight of field {name!r} must be an integer >= 1, got {weight!r}")
        if self.default_field not in self.weights:
            raise ValueError(f"default_field {self.default_field!r} is not a configured field")

    def weight(self, field_name: str) -> int:
        return self.weights[field_name]


@dataclass
class _Scanner:
    text: str
    pos: int = 0

    def skip_space(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def read_quoted(self) -> str:
        start = self.pos
        end = self.text.find('"', start + 1)
        if end < 0:
            raise QueryParseError(f"unbalanced quote at offset {start}")
        self.pos = end + 1
        return self.text[start + 1 : end]

    def read_bare(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and not self.text[self.pos].isspace() and self.text[self.pos] != '"':
            self.pos += 1
        return self.text[start : self.pos]

    def read_weight(self) -> int | None:
        m = re.match(r"\^(\d+)", self.text[self.pos :])
        if not m:
            return None
        self.pos += m.end()
        return int(m.group(1))


def _scan(text: str, ambient_field: str, allow_weights: bool) -> tuple[list[SearchUnit], list[int | None]]:
    sc = _Scanner(text)
    units: list[SearchUnit] = []
    weights: list[int | None] = []
    pending: str | None = None

    def emit(pattern: str, field_name: str, kind: str, weight: int | None) -> None:
        nonlocal pending
        if kind == WORD and len(pattern) > 1 and pattern.startswith("%") and pattern.endswith("%"):
            pattern = pattern[1:-1]
            kind = PHRASE
        if not pattern.strip():
            pending = None
            return
        op = pending or "+"
        if not units and op == "|":
            op = "+"
        units.append(SearchUnit(op, pattern, field_name, kind))
        weights.append(weight)
        pending = None

    while True:
        sc.skip_space()
        if sc.at_end():
            break
        ch = text[sc.pos]
        if ch == '"':
            pattern = sc.read_quoted()
            weight = sc.read_weight() if allow_weights else None
            emit(pattern, ambient_field, PHRASE, weight)
            continue

        # operator prefix glued to a term, e.g. "-year:2010"
        if ch in BOOLEAN_EQUIVALENTS:
            sc.pos += 1
            pending = ch
            continue

        m = _FIELD_RE.match(text, sc.pos)
        if m:
            sc.pos = m.end()
            if not sc.at_end() and text[sc.pos] == '"':
                pattern = sc.read_quoted()
                weight = sc.read_weight() if allow_weights else None
                emit(pattern, m.group(1), PHRASE, weight)
                continue
            token = sc.read_bare()
            if not token:
                # a dangling "field:" is ignored
                pending = None
                continue
            weight = None
            if allow_weights:
                wm = _WEIGHT_RE.search(token)
                if wm:
                    weight = int(wm.group(1))
                    token = token[: wm.start()]
            emit(token, m.group(1), WORD, weight)
            continue

        token = sc.read_bare()
        if token in TEXTUAL_OPERATORS:
            pending = TEXTUAL_OPERATORS[token]
            continue
        weight = None
        if allow_weights:
            wm = _WEIGHT_RE.search(token)
            if wm:
                weight = int(wm.group(1))
                token = token[: wm.start()]
        emit(token, ambient_field, WORD, weight)

    return units, weights


def parse(query: str, ambient_field: str) -> list[SearchUnit]:
    """Split a query into search units, left to right.

    Unprefixed terms take ``ambient_field``. AND/OR/NOT are synonyms of
    ``+``/``|``/``-``; a unit without an operator gets ``+``.
    """
    units, _ = _scan(query, ambient_field, allow_weights=False)
    return units


def parse_weighted(query: str, ambient_field: str = "") -> list[tuple[SearchUnit, int]]:
    """Parse a rendered ``field:pattern^weight`` query. Missing weights count as 1."""
    units, weights = _scan(query, ambient_field, allow_weights=True)
    out = []
    for unit, weight in zip(units, weights):
        if not unit.field:
            raise QueryParseError(f"weighted query part {unit.pattern!r} has no field")
        out.append((unit, 1 if weight is None else weight))
    return out


def substitute_default(u: SearchUnit, s: FieldSettings) -> SearchUnit:
    if u.field in s.weights:
        return u
    return replace(u, field=s.default_field)


def render_weighted(units: list[SearchUnit], s: FieldSettings) -> str:
    query = ""
    for u in units:
        pattern = f'"{u.pattern}"' if u.kind == PHRASE else u.pattern
        part = f"{u.field}:{pattern}^{s.weights[u.field]}"
        # connector from the second part on; negation allowed on the first
        if query or u.operator == "-":
            query += f" {BOOLEAN_EQUIVALENTS[u.operator]} "
        query += part
    return query


def transform(query: str, s: FieldSettings, ambient_field: str | None = None) -> str:
    """Parse, substitute unsupported fields and render in one step."""
    units = parse(query, ambient_field or s.default_field)
    return render_weighted([substitute_default(u, s) for u in units], s)
