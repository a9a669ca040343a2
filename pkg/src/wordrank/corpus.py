"""Records, corpus files and synthetic corpora."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from itertools import accumulate
from pathlib import Path
from typing import Iterable, Sequence

STANDARD_FIELDS = ("abstract", "author", "fulltext", "keyword", "title")
_STRING_KEYS = ("abstract", "first_author", "keyword", "title", "fulltext")


class CorpusError(ValueError):
    """Raised for malformed corpus files or inconsistent record sets."""


@dataclass(frozen=True)
class Record:
    id: int
    abstract: str = ""
    first_author: str = ""
    additional_authors: tuple[str, ...] = ()
    keyword: str = ""
    title: str = ""
    fulltext: str = ""
    # Extra string-valued metadata (e.g. "description"), indexable by name.
    extra: dict[str, str] = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self) -> None:
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id <= 0:
            raise CorpusError(f"record id must be a positive integer, got {self.id!r}")
        if not isinstance(self.additional_authors, tuple):
            object.__setattr__(self, "additional_authors", tuple(self.additional_authors))

    def field_text(self, name: str) -> str:
        """Text of a ranking field; unknown names map to ""."""
        if name == "author":
            return author_field(self)
        if name in _STRING_KEYS:
            return getattr(self, name)
        return self.extra.get(name, "")

    def to_json(self) -> dict:
        data: dict = {"id": self.id}
        for key in _STRING_KEYS:
            value = getattr(self, key)
            if value:
                data[key] = value
        if self.additional_authors:
            data["additional_authors"] = list(self.additional_authors)
        data.update(self.extra)
        return data


def author_field(r: Record) -> str:
    parts = [r.first_author.strip(), *(a.strip() for a in r.additional_authors)]
    return " ".join(p for p in parts if p)


@dataclass(frozen=True)
class Corpus:
    records: tuple[Record, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[int] = set()
        for r in self.records:
            if r.id in seen:
                raise CorpusError(f"duplicate record id {r.id}")
            seen.add(r.id)

    @property
    def max_recid(self) -> int:
        return max((r.id for r in self.records), default=0)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def by_id(self) -> dict[int, Record]:
        return {r.id: r for r in self.records}

    def slice(self, start: int, stop: int) -> Corpus:
        return Corpus(self.records[start:stop])


def _record_from_json(data: object, lineno: int) -> Record:
    if not isinstance(data, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    if "id" not in data:
        raise CorpusError(f"line {lineno}: missing 'id'")
    recid = data["id"]
    if not isinstance(recid, int) or isinstance(recid, bool):
        raise CorpusError(f"line {lineno}: 'id' must be an integer")
    if recid <= 0:
        raise CorpusError(f"line {lineno}: record id must be positive, got {recid}")
    kwargs: dict = {}
    extra: dict[str, str] = {}
    for key, value in data.items():
        if key == "id":
            continue
        if key == "additional_authors":
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise CorpusError(f"line {lineno}: 'additional_authors' must be a list of strings")
            kwargs[key] = tuple(value)
        elif key in ("keyword", "title") and isinstance(value, list):
            # multi-valued metadata collapses to one string
            if not all(isinstance(v, str) for v in value):
                raise CorpusError(f"line {lineno}: {key!r} values must be strings")
            kwargs[key] = " ".join(value)
        elif isinstance(value, str):
            if key in _STRING_KEYS:
                kwargs[key] = value
            else:
                extra[key] = value
        elif value is None:
            continue
        else:
            raise CorpusError(f"line {lineno}: {key!r} must be a string")
    return Record(id=recid, extra=extra, **kwargs)


def load_corpus(path: str | Path) -> Corpus:
    """Load a JSON-lines corpus file. Blank lines are skipped."""
    records = []
    seen: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            record = _record_from_json(data, lineno)
            if record.id in seen:
                raise CorpusError(
                    f"line {lineno}: duplicate record id {record.id} (first seen on line {seen[record.id]})"
                )
            seen[record.id] = lineno
            records.append(record)
    return Corpus(tuple(records))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in corpus.records:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def shuffle(c: Corpus, seed: int) -> Corpus:
    records = list(c.records)
    random.Random(seed).shuffle(records)
    return Corpus(tuple(records))


# --- synthetic corpora -------------------------------------------------------

PROBE_PHRASES = ("of the", "phys rev", "standard model", "higgs boson")
PROBE_TERMS = ("of", "model", "boson", "higgs", "standard", "phys", "rev", "the")

_SYLLABLES = (
    "ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "va", "ze", "bri", "dro",
    "fla", "gre", "klu", "pro", "str", "tha", "qui", "xe", "on", "el", "ix", "ur",
)
_SURNAMES = (
    "Ellis", "Enqvist", "Nanopoulos", "Higgs", "Englert", "Kibble", "Guralnik",
    "Hagen", "Brout", "Weinberg", "Salam", "Glashow", "Veltman", "Hooft", "Gross",
)


@dataclass(frozen=True)
class SizeProfile:
    """Fulltext length classes as (min words, max words, probability)."""

    short: tuple[int, int, float] = (30, 80, 0.6)
    midsize: tuple[int, int, float] = (150, 300, 0.3)
    long: tuple[int, int, float] = (600, 1200, 0.1)
    vocabulary_size: int = 20_000
    zipf_exponent: float = 1.07
    # per-document probability that each probe phrase is inserted
    phrase_rates: tuple[tuple[str, float], ...] = (
        ("of the", 0.8),
        ("phys rev", 0.35),
        ("standard model", 0.3),
        ("higgs boson", 0.12),
    )
    model_rate: float = 0.25
    boson_rate: float = 0.05


def _pseudo_word(i: int) -> str:
    parts = []
    n = i + len(_SYLLABLES)
    while n:
        n, r = divmod(n, len(_SYLLABLES))
        parts.append(_SYLLABLES[r])
    return "".join(parts)


class _Vocabulary:
    def __init__(self, profile: SizeProfile) -> None:
        # "the" and "of" are the two most frequent words; the other probe
        # terms only enter through controlled insertion.
        probes = set(PROBE_TERMS)
        words = ["the", "of"]
        i = 0
        while len(words) < profile.vocabulary_size:
            w = _pseudo_word(i)
            i += 1
            if w not in probes:
                words.append(w)
        weights = [1.0 / (rank ** profile.zipf_exponent) for rank in range(1, len(words) + 1)]
        self.words = words
        self.cum_weights = list(accumulate(weights))

    def sample(self, rng: random.Random, k: int) -> list[str]:
        return rng.choices(self.words, cum_weights=self.cum_weights, k=k)


def _insert(rng: random.Random, words: list[str], phrase: str) -> None:
    pos = rng.randint(0, len(words))
    words[pos:pos] = phrase.split()


def _size_class(rng: random.Random, profile: SizeProfile) -> tuple[int, int]:
    classes = (profile.short, profile.midsize, profile.long)
    lo, hi, _ = rng.choices(classes, weights=[c[2] for c in classes], k=1)[0]
    return lo, hi


def generate_synthetic(n: int, seed: int, profile: SizeProfile | None = None) -> Corpus:
    """Deterministic corpus of ``n`` records with ids 1..n.

    Fulltext words follow a Zipf distribution. Every fulltext contains "of";
    the other probe terms appear at the rates given by ``profile``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    profile = profile or SizeProfile()
    rng = random.Random(seed)
    vocab = _Vocabulary(profile)
    records = []
    for recid in range(1, n + 1):
        lo, hi = _size_class(rng, profile)
        words = vocab.sample(rng, rng.randint(lo, hi))
        for phrase, rate in profile.phrase_rates:
            if rng.random() < rate:
                _insert(rng, words, phrase)
        if rng.random() < profile.model_rate:
            _insert(rng, words, "model")
        if rng.random() < profile.boson_rate:
            _insert(rng, words, "boson")
        if "of" not in words:
            _insert(rng, words, "of")

        title = vocab.sample(rng, rng.randint(3, 8))
        if rng.random() < 0.1:
            _insert(rng, title, "higgs boson")
        authors = [
            f"{rng.choice(_SURNAMES)}, {chr(ord('A') + rng.randrange(26))}"
            for _ in range(rng.randint(1, 4))
        ]
        records.append(
            Record(
                id=recid,
                title=" ".join(title).capitalize(),
                abstract=" ".join(vocab.sample(rng, rng.randint(20, 60))),
                first_author=authors[0],
                additional_authors=tuple(authors[1:]),
                keyword=" ".join(vocab.sample(rng, rng.randint(1, 3))),
                fulltext=" ".join(words),
            )
        )
    return Corpus(tuple(records))


def renumber(records: Sequence[Record] | Iterable[Record], start: int = 1) -> Corpus:
    """Assign consecutive ids starting at ``start`` in the given order."""
    return Corpus(tuple(replace(r, id=start + i) for i, r in enumerate(records)))
