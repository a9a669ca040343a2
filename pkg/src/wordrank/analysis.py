"""Text normalization shared by indexing and querying."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import snowballstemmer

_TOKEN_RE = re.compile(r"[^\W_]+")
_STEMMER = snowballstemmer.stemmer("english")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: one term per line, ``#`` starts a comment."""
    with open(path, encoding="utf-8") as fh:
        return _parse_stopwords(fh.read())


def default_stopwords() -> frozenset[str]:
    text = resources.files("wordrank").joinpath("data/stopwords_en.txt").read_text("utf-8")
    return _parse_stopwords(text)


def _parse_stopwords(text: str) -> frozenset[str]:
    terms = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            terms.add(line)
    return frozenset(terms)


@dataclass(frozen=True)
class AnalyzerConfig:
    language: str = "en"
    stopwords: frozenset[str] = field(default_factory=frozenset)
    stemming_enabled: bool = True
    stop_enabled: bool = False

    def __post_init__(self) -> None:
        if self.language != "en":
            raise ValueError(f"unsupported analyzer language {self.language!r}")
        lowered = frozenset(t.lower() for t in self.stopwords)
        if lowered != self.stopwords:
            object.__setattr__(self, "stopwords", lowered)

    def to_dict(self) -> dict:
        return {
            "language": self.language,
            "stemming_enabled": self.stemming_enabled,
            "stop_enabled": self.stop_enabled,
            "stopwords": sorted(self.stopwords),
        }

    @classmethod
    def from_dict(cls, data: dict) -> AnalyzerConfig:
        return cls(
            language=data.get("language", "en"),
            stopwords=frozenset(data.get("stopwords", ())),
            stemming_enabled=bool(data.get("stemming_enabled", True)),
            stop_enabled=bool(data.get("stop_enabled", False)),
        )

    def fingerprint(self) -> str:
        """Short digest identifying the analysis chain; equal configs share it."""
        active = self.to_dict()
        if not self.stop_enabled:
            active["stopwords"] = []
        blob = json.dumps(active, sort_keys=True).encode("utf-8")
        return hashlib.sha1(blob).hexdigest()[:16]


def tokenize(text: str) -> list[str]:
    """Lowercase terms split on any run of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=200_000)
def stem(term: str) -> str:
    return _STEMMER.stemWord(term)


def analyze(text: str, cfg: AnalyzerConfig) -> list[str]:
    terms = tokenize(text)
    if cfg.stop_enabled and cfg.stopwords:
        stop = cfg.stopwords
        terms = [t for t in terms if t not in stop]
    if cfg.stemming_enabled:
        terms = [stem(t) for t in terms]
    return terms
