"""Ranking configuration, method registry and the shared result pipeline.

Config files are INI text::

    [rank_method]
    function = word_similarity_unified

    [field_settings]
    fields = { "abstract": {"weight":3},
               "fulltext": {"weight":10} }
    default_field = fulltext
    relevance_number_output_prologue = (
    relevance_number_output_epilogue = )

    [word_similarity]
    stemming = en
    stopword = False
    stopword_file = stopwords.txt
    rows = 10
    bm25_k1 = 1.2
    bm25_b = 1.0

``[word_similarity]`` is optional. ``stemming`` is ``en`` or ``None``;
``stopword = True`` enables the bundled list and ``stopword_file`` names a
custom one (relative to the config file).

The ``fields`` mapping is read by a small dedicated parser, never evaluated.
"""

from __future__ import annotations

import configparser
import heapq
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from .analysis import AnalyzerConfig, default_stopwords, load_stopwords
from .idset import IdSet
from .index import FieldIndex, open_index
from .query import FieldSettings, SearchUnit, parse, substitute_default
from .rank_prob import word_similarity_perfield
from .rank_vsm import word_similarity_unified

log = logging.getLogger(__name__)

PLACEHOLDER_WEIGHT = "INTEGER"
PLACEHOLDER_FUNCTION = "word_similarity_<adapter>"
DEFAULT_FUNCTION = "word_similarity_unified"

_ENGINE_KEYS = {"rows": int, "bm25_k1": float, "bm25_b": float}


class ConfigError(ValueError):
    """Invalid or incomplete ranking configuration."""


class RankingError(Exception):
    pass


class UnknownMethodError(RankingError):
    pass


class AnalyzerMismatchError(RankingError):
    pass


Hit = tuple[int, int]
Engine = Callable[..., tuple[list[Hit], str]]

METHODS: dict[str, Engine] = {}


def register_method(name: str, engine: Engine) -> None:
    METHODS[name] = engine


def get_method(name: str) -> Engine:
    try:
        return METHODS[name]
    except KeyError:
        known = ", ".join(sorted(METHODS))
        raise UnknownMethodError(f"unknown ranking method {name!r} (known: {known})") from None


register_method("word_similarity_unified", word_similarity_unified)
register_method("word_similarity_perfield", word_similarity_perfield)
# adapter names used by the original templates
register_method("word_similarity_solr", word_similarity_unified)
register_method("word_similarity_xapian", word_similarity_perfield)


# -- config -------------------------------------------------------------------------


@dataclass(frozen=True)
class RankMethodConfig:
    function: str
    field_settings: FieldSettings
    engine_params: Mapping[str, object] = field(default_factory=dict)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "engine_params", dict(self.engine_params))
        get_method(self.function)

    @property
    def fields(self) -> list[str]:
        return list(self.field_settings.weights)


class _LiteralParser:
    """Recursive descent over ``{ "name": {"weight": 3}, ... }``."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.placeholders = 0

    def error(self, msg: str) -> ConfigError:
        return ConfigError(f"fields mapping, offset {self.pos}: {msg}")

    def skip(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "\\" and text[self.pos + 1 : self.pos + 2] == "\n":
                self.pos += 2
            else:
                break

    def expect(self, ch: str) -> None:
        self.skip()
        if self.text[self.pos : self.pos + 1] != ch:
            found = self.text[self.pos : self.pos + 1] or "end of text"
            raise self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos : self.pos + 1]

    def string(self) -> str:
        self.expect('"')
        end = self.text.find('"', self.pos)
        if end < 0:
            raise self.error("unterminated string")
        value = self.text[self.pos : end]
        if "\n" in value:
            raise self.error("newline inside string")
        self.pos = end + 1
        return value

    def integer(self) -> int:
        self.skip()
        if self.text.startswith(PLACEHOLDER_WEIGHT, self.pos):
            self.pos += len(PLACEHOLDER_WEIGHT)
            self.placeholders += 1
            return 1
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        digits = self.text[start : self.pos]
        if not digits or digits == "-":
            raise self.error("expected an integer")
        return int(digits)

    def mapping(self, value: Callable[[], object]) -> dict:
        self.expect("{")
        out: dict = {}
        if self.peek() == "}":
            self.pos += 1
            return out
        while True:
            key = self.string()
            if key in out:
                raise self.error(f"duplicate key {key!r}")
            self.expect(":")
            out[key] = value()
            nxt = self.peek()
            if nxt == ",":
                self.pos += 1
                if self.peek() == "}":
                    self.pos += 1
                    return out
                continue
            if nxt == "}":
                self.pos += 1
                return out
            raise self.error(f"expected ',' or '}}', found {nxt or 'end of text'!r}")

    def parse(self) -> dict[str, dict[str, int]]:
        result = self.mapping(lambda: self.mapping(self.integer))
        self.skip()
        if self.pos != len(self.text):
            raise self.error("trailing characters")
        return result


def parse_fields_literal(text: str) -> dict[str, dict[str, int]]:
    return _LiteralParser(text).parse()


def _bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off", "none", ""):
        return False
    raise ConfigError(f"{key} must be True or False, got {value!r}")


def loads_config(text: str, source: str = "<string>", base_dir: Path | None = None) -> RankMethodConfig:
    parser = configparser.ConfigParser(
        interpolation=None, strict=False, comment_prefixes=("#", ";")
    )
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    for section in ("rank_method", "field_settings"):
        if not parser.has_section(section):
            raise ConfigError(f"{source}: missing section [{section}]")
    for section, key in (("rank_method", "function"), ("field_settings", "fields"), ("field_settings", "default_field")):
        if not parser.has_option(section, key):
            raise ConfigError(f"{source}: missing key {key!r} in [{section}]")

    function = parser.get("rank_method", "function").strip()
    if function == PLACEHOLDER_FUNCTION:
        log.warning("%s: template function placeholder resolved to %s", source, DEFAULT_FUNCTION)
        function = DEFAULT_FUNCTION

    literal = _LiteralParser(parser.get("field_settings", "fields"))
    fields = literal.parse()
    if literal.placeholders:
        log.warning("%s: %d template weight placeholder(s) resolved to 1", source, literal.placeholders)
    weights = {}
    for name, props in fields.items():
        unknown = set(props) - {"weight"}
        if unknown:
            raise ConfigError(f"{source}: field {name!r} has unsupported properties {sorted(unknown)}")
        if "weight" not in props:
            raise ConfigError(f"{source}: field {name!r} has no weight")
        if props["weight"] < 1:
            raise ConfigError(f"{source}: weight of field {name!r} must be >= 1, got {props['weight']}")
        weights[name] = props["weight"]

    def opt(key: str) -> str:
        for section in ("field_settings", "word_similarity"):
            if parser.has_option(section, key):
                return parser.get(section, key)
        return ""

    try:
        settings = FieldSettings(
            weights=weights,
            default_field=parser.get("field_settings", "default_field").strip(),
            prologue=opt("relevance_number_output_prologue"),
            epilogue=opt("relevance_number_output_epilogue"),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    params: dict[str, object] = {}
    stemming, stop_enabled, stopwords = True, False, default_stopwords()
    if parser.has_section("word_similarity"):
        ws = parser["word_similarity"]
        for key, kind in _ENGINE_KEYS.items():
            if key in ws:
                try:
                    params[key] = kind(ws[key])
                except ValueError:
                    raise ConfigError(f"{source}: {key} must be a {kind.__name__}, got {ws[key]!r}") from None
        if "rows" in params and params["rows"] < 1:
            raise ConfigError(f"{source}: rows must be >= 1")
        if "stemming" in ws:
            value = ws["stemming"].strip()
            if value.lower() == "none":
                stemming = False
            elif value == "en":
                stemming = True
            else:
                raise ConfigError(f"{source}: unsupported stemming {value!r} (use en or None)")
            params["stemming"] = value
        if "stopword" in ws:
            stop_enabled = _bool(ws["stopword"], "stopword")
            params["stopword"] = "True" if stop_enabled else "False"
        if ws.get("stopword_file", "").strip():
            path = Path(ws["stopword_file"].strip())
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            try:
                stopwords = load_stopwords(path)
            except OSError as exc:
                raise ConfigError(f"{source}: cannot read stopword file: {exc}") from None
            stop_enabled = True
            params["stopword_file"] = ws["stopword_file"].strip()
            params["stopword"] = "True"

    try:
        return RankMethodConfig(
            function=function,
            field_settings=settings,
            engine_params=params,
            analyzer=AnalyzerConfig(
                stopwords=stopwords if stop_enabled else frozenset(),
                stemming_enabled=stemming,
                stop_enabled=stop_enabled,
            ),
        )
    except UnknownMethodError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> RankMethodConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return loads_config(text, source=str(path), base_dir=path.parent)


def dumps_config(cfg: RankMethodConfig) -> str:
    s = cfg.field_settings
    entries = [f'"{name}": {{"weight":{w}}}' for name, w in s.weights.items()]
    fields = "{ " + ",\n          ".join(entries) + "\n        }"
    lines = [
        "[rank_method]",
        f"function = {cfg.function}",
        "",
        "[field_settings]",
        f"fields = {fields}",
        f"default_field = {s.default_field}",
    ]
    if s.prologue:
        lines.append(f"relevance_number_output_prologue = {s.prologue}")
    if s.epilogue:
        lines.append(f"relevance_number_output_epilogue = {s.epilogue}")
    if cfg.engine_params:
        lines += ["", "[word_similarity]"]
        for key in ("stemming", "stopword", "stopword_file", "rows", "bm25_k1", "bm25_b"):
            if key in cfg.engine_params:
                lines.append(f"{key} = {cfg.engine_params[key]}")
    return "\n".join(lines) + "\n"


def default_config(function: str = DEFAULT_FUNCTION) -> RankMethodConfig:
    return RankMethodConfig(
        function=function,
        field_settings=FieldSettings(
            weights={"abstract": 3, "author": 1, "fulltext": 10, "keyword": 2, "title": 2},
            default_field="fulltext",
            prologue="(",
            epilogue=")",
        ),
    )


# -- pipeline -------------------------------------------------------------------------


@dataclass
class RankedList:
    entries: list[Hit]
    prologue: str = ""
    epilogue: str = ""
    voutput: str = ""

    def descending(self) -> list[Hit]:
        return sorted(self.entries, key=lambda e: (-e[1], e[0]))


def normalize_scores(hits: list[Hit]) -> list[Hit]:
    """Rescale so the best score becomes 100: ``floor(100 / max * score)``."""
    max_score = max((score for _, score in hits), default=0)
    if max_score <= 0:
        return list(hits)
    return [(recid, (100 * score) // max_score) for recid, score in hits]


def merge_unranked(hitset: IdSet, ranked: list[Hit]) -> list[Hit]:
    """Add hitset members missing from ``ranked`` with score 0; sort ascending by score."""
    seen = IdSet()
    for recid, _ in ranked:
        if recid in seen:
            raise ValueError(f"record {recid} ranked twice")
        if recid not in hitset:
            raise ValueError(f"ranked record {recid} is not in the hitset")
        seen.add(recid)
    # unranked ids come out of the set already in ascending order
    unranked = [(recid, 0) for recid in hitset.difference(seen)]
    return list(heapq.merge(unranked, sorted(ranked, key=_by_score), key=_by_score))


def _by_score(entry: Hit) -> tuple[int, int]:
    return entry[1], entry[0]


def open_indexes(root: str | Path, fields: list[str]) -> dict[str, FieldIndex]:
    return {name: open_index(root, name) for name in fields}


def prepare_units(cfg: RankMethodConfig, query: str, ambient_field: str | None = None) -> list[SearchUnit]:
    s = cfg.field_settings
    return [substitute_default(u, s) for u in parse(query, ambient_field or s.default_field)]


def rank(
    method: RankMethodConfig,
    query: str,
    hitset: IdSet,
    indexes: Mapping[str, FieldIndex],
    ambient_field: str | None = None,
    engine_options: Mapping[str, object] | None = None,
) -> RankedList:
    """Rank every member of ``hitset`` for ``query`` with the configured engine."""
    engine = get_method(method.function)
    s = method.field_settings
    expected = method.analyzer.fingerprint()
    for name in s.weights:
        ix = indexes.get(name)
        if ix is not None and ix.analyzer.fingerprint() != expected:
            raise AnalyzerMismatchError(
                f"index {name!r} uses analyzer {ix.analyzer.fingerprint()}, config expects {expected}"
            )
    units = prepare_units(method, query, ambient_field)
    if not hitset:
        return RankedList([], s.prologue, s.epilogue, "empty hitset\n")
    if not units:
        return RankedList(merge_unranked(hitset, []), s.prologue, s.epilogue, "empty query\n")

    ranked, voutput = engine(units, hitset, s, method.engine_params, indexes, **(engine_options or {}))
    entries = merge_unranked(hitset, normalize_scores(ranked))
    return RankedList(entries, s.prologue, s.epilogue, voutput)
