"""Per-field positional inverted index with on-disk persistence.

Layout of one field directory::

    <root>/<field>/terms.bin     term table (term, df, postings block size)
    <root>/<field>/postings.bin  delta-encoded postings with positions
    <root>/<field>/docs.bin      every known record id and its token count
    <root>/<field>/meta          key=value text lines

``save`` writes the plain layout, keeping terms in insertion order. ``optimize``
rewrites the directory with a sorted, front-coded term table and postings
blocks in term order.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

from .analysis import AnalyzerConfig, analyze

FORMAT_VERSION = 1

TERMS_FILE = "terms.bin"
POSTINGS_FILE = "postings.bin"
DOCS_FILE = "docs.bin"
META_FILE = "meta"

_TERMS_MAGIC = b"WRT1"
_POSTINGS_MAGIC = b"WRP1"
_DOCS_MAGIC = b"WRD1"
_LAYOUT_PLAIN = 0
_LAYOUT_FRONT_CODED = 1


class IndexFormatError(Exception):
    """An index directory is missing, partial, corrupt or of another version."""


class UnknownFieldError(KeyError):
    """A query references a field with no opened index."""


@dataclass(frozen=True)
class Posting:
    recid: int
    positions: tuple[int, ...]

    @property
    def tf(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class IndexStats:
    distinct_terms: int
    total_postings: int
    bytes_on_disk: int


class FieldIndex:
    """Forward (term -> postings) and reverse (record -> term counts) index for one field."""

    def __init__(self, field: str, analyzer: AnalyzerConfig | None = None) -> None:
        self.field = field
        self.analyzer = analyzer or AnalyzerConfig()
        self._forward: dict[str, dict[int, tuple[int, ...]]] = {}
        self._reverse: dict[int, dict[str, int]] = {}
        self._doc_len: dict[int, int] = {}
        self._total_tokens = 0
        # bumped on every mutation so scorers can cache derived statistics
        self.version = 0

    def __repr__(self) -> str:
        return f"FieldIndex({self.field!r}, docs={self.doc_count}, terms={len(self._forward)})"

    # -- writing -------------------------------------------------------------

    def add_document(self, recid: int, text: str) -> None:
        """Add or replace the content stored for ``recid``."""
        if recid <= 0:
            raise ValueError(f"record ids must be positive, got {recid}")
        self._remove(recid)
        terms = analyze(text, self.analyzer)
        positions: dict[str, list[int]] = {}
        for pos, term in enumerate(terms):
            positions.setdefault(term, []).append(pos)
        self._reverse[recid] = {t: len(p) for t, p in positions.items()}
        self._doc_len[recid] = len(terms)
        self._total_tokens += len(terms)
        forward = self._forward
        for term, plist in positions.items():
            by_doc = forward.get(term)
            if by_doc is None:
                forward[term] = {recid: tuple(plist)}
            else:
                by_doc[recid] = tuple(plist)
        self.version += 1

    def _remove(self, recid: int) -> None:
        old = self._reverse.pop(recid, None)
        if old is None:
            return
        self._total_tokens -= self._doc_len.pop(recid)
        for term in old:
            by_doc = self._forward[term]
            del by_doc[recid]
            if not by_doc:
                del self._forward[term]
        self.version += 1

    # -- reading -------------------------------------------------------------

    @property
    def doc_count(self) -> int:
        return len(self._reverse)

    @property
    def total_tokens(self) -> int:
        return self._total_tokens

    @property
    def avg_doc_len(self) -> float:
        return self._total_tokens / len(self._reverse) if self._reverse else 0.0

    @property
    def term_postings(self) -> Mapping[str, Mapping[int, tuple[int, ...]]]:
        """Forward view: analyzed term -> {recid: positions}."""
        return self._forward

    @property
    def doc_terms(self) -> Mapping[int, Mapping[str, int]]:
        """Reverse view: recid -> {analyzed term: tf}."""
        return self._reverse

    @property
    def doc_len(self) -> Mapping[int, int]:
        return self._doc_len

    def recids(self) -> list[int]:
        return sorted(self._reverse)

    def terms(self) -> Iterator[str]:
        return iter(self._forward)

    def df(self, term: str) -> int:
        """Document frequency of an analyzed term."""
        return len(self._forward.get(term, ()))

    def postings_for(self, term: str) -> list[Posting]:
        """Postings of an already analyzed term, ascending by recid."""
        by_doc = self._forward.get(term)
        if not by_doc:
            return []
        return [Posting(recid, by_doc[recid]) for recid in sorted(by_doc)]

    def postings(self, term: str) -> list[Posting]:
        """Postings of a raw token; the token is analyzed before lookup."""
        analyzed = analyze(term, self.analyzer)
        if len(analyzed) != 1:
            return []
        return self.postings_for(analyzed[0])

    def match_terms(self, terms: list[str], phrase: bool = False) -> list[int]:
        """Records containing every analyzed term; with ``phrase`` they must be consecutive."""
        if not terms:
            return []
        distinct = list(dict.fromkeys(terms))
        lists = []
        for t in distinct:
            by_doc = self._forward.get(t)
            if not by_doc:
                return []
            lists.append(by_doc)
        lists.sort(key=len)
        found = set(lists[0])
        for by_doc in lists[1:]:
            found.intersection_update(by_doc.keys())
            if not found:
                return []
        if phrase and len(terms) > 1:
            forward = self._forward
            found = {
                recid
                for recid in found
                if _has_phrase([forward[t][recid] for t in terms])
            }
        return sorted(found)

    def stats(self, bytes_on_disk: int = 0) -> IndexStats:
        return IndexStats(
            distinct_terms=len(self._forward),
            total_postings=sum(len(d) for d in self._forward.values()),
            bytes_on_disk=bytes_on_disk,
        )

    def same_content(self, other: FieldIndex) -> bool:
        return (
            self.field == other.field
            and self._forward == other._forward
            and self._doc_len == other._doc_len
            and self.analyzer.fingerprint() == other.analyzer.fingerprint()
        )


def _has_phrase(position_lists: list[tuple[int, ...]]) -> bool:
    rest = [set(p) for p in position_lists[1:]]
    for start in position_lists[0]:
        if all(start + i + 1 in s for i, s in enumerate(rest)):
            return True
    return False


# -- varint helpers ------------------------------------------------------------


def _put(out: bytearray, value: int) -> None:
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def _get(buf: bytes, pos: int) -> tuple[int, int]:
    b = buf[pos]
    if b < 0x80:
        return b, pos + 1
    value = b & 0x7F
    shift = 7
    pos += 1
    while True:
        b = buf[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if b < 0x80:
            return value, pos
        shift += 7


def _encode_postings(by_doc: Mapping[int, tuple[int, ...]]) -> bytearray:
    out = bytearray()
    _put(out, len(by_doc))
    prev = 0
    for recid in sorted(by_doc):
        positions = by_doc[recid]
        _put(out, recid - prev)
        prev = recid
        _put(out, len(positions))
        last = 0
        for p in positions:
            _put(out, p - last)
            last = p
    return out


def _encode_terms(entries: list[tuple[str, int, int]], layout: int) -> bytearray:
    out = bytearray(_TERMS_MAGIC)
    out.append(layout)
    _put(out, len(entries))
    offset = 0
    prev = b""
    for term, df, size in entries:
        raw = term.encode("utf-8")
        if layout == _LAYOUT_FRONT_CODED:
            shared = 0
            limit = min(len(raw), len(prev))
            while shared < limit and raw[shared] == prev[shared]:
                shared += 1
            _put(out, shared)
            _put(out, len(raw) - shared)
            out += raw[shared:]
            prev = raw
        else:
            _put(out, len(raw))
            out += raw
            _put(out, offset)
        _put(out, df)
        _put(out, size)
        offset += size
    return out


def _encode_docs(doc_len: Mapping[int, int]) -> bytearray:
    out = bytearray(_DOCS_MAGIC)
    _put(out, len(doc_len))
    prev = 0
    for recid in sorted(doc_len):
        _put(out, recid - prev)
        prev = recid
        _put(out, doc_len[recid])
    return out


# -- persistence -----------------------------------------------------------------


def field_dir(root: str | Path, field: str) -> Path:
    return Path(root) / field


def _dir_bytes(path: Path) -> int:
    return sum(f.stat().st_size for f in path.iterdir() if f.is_file())


def _write_meta(path: Path, meta: dict[str, str]) -> None:
    tmp = path / (META_FILE + ".tmp")
    tmp.write_text("".join(f"{k}={v}\n" for k, v in meta.items()), encoding="utf-8")
    os.replace(tmp, path / META_FILE)


def read_meta(root: str | Path, field: str) -> dict[str, str]:
    path = field_dir(root, field) / META_FILE
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise IndexFormatError(f"no index for field {field!r} under {root}") from None
    meta = {}
    for line in text.splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            meta[key] = value
    return meta


def mark_partial(root: str | Path, field: str) -> None:
    path = field_dir(root, field)
    path.mkdir(parents=True, exist_ok=True)
    try:
        meta = read_meta(root, field)
    except IndexFormatError:
        meta = {"format_version": str(FORMAT_VERSION), "field": field}
    meta["state"] = "partial"
    _write_meta(path, meta)


def _write(ix: FieldIndex, path: Path, layout: int) -> IndexStats:
    path.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": str(FORMAT_VERSION),
        "field": ix.field,
        "doc_count": str(ix.doc_count),
        "analyzer": ix.analyzer.fingerprint(),
        "analyzer_config": json.dumps(ix.analyzer.to_dict(), sort_keys=True),
        "layout": str(layout),
        "state": "partial",
    }
    _write_meta(path, meta)

    terms = list(ix.term_postings)
    if layout == _LAYOUT_FRONT_CODED:
        terms.sort(key=lambda t: t.encode("utf-8"))
    postings = bytearray(_POSTINGS_MAGIC)
    entries = []
    for term in terms:
        by_doc = ix.term_postings[term]
        block = _encode_postings(by_doc)
        postings += block
        entries.append((term, len(by_doc), len(block)))

    (path / POSTINGS_FILE).write_bytes(postings)
    (path / TERMS_FILE).write_bytes(_encode_terms(entries, layout))
    (path / DOCS_FILE).write_bytes(_encode_docs(ix.doc_len))
    meta["state"] = "complete"
    _write_meta(path, meta)
    return ix.stats(_dir_bytes(path))


def save(ix: FieldIndex, root: str | Path) -> IndexStats:
    """Write ``ix`` to ``<root>/<field>/`` in the plain layout."""
    return _write(ix, field_dir(root, ix.field), _LAYOUT_PLAIN)


def open_index(root: str | Path, field: str) -> FieldIndex:
    """Load the index for ``field`` stored under ``root``."""
    path = field_dir(root, field)
    meta = read_meta(root, field)
    if meta.get("format_version") != str(FORMAT_VERSION):
        raise IndexFormatError(
            f"index {path} has format version {meta.get('format_version')!r}, expected {FORMAT_VERSION}"
        )
    if meta.get("state") != "complete":
        raise IndexFormatError(f"index {path} is in state {meta.get('state')!r}")
    try:
        analyzer = AnalyzerConfig.from_dict(json.loads(meta["analyzer_config"]))
        terms_buf = (path / TERMS_FILE).read_bytes()
        postings_buf = (path / POSTINGS_FILE).read_bytes()
        docs_buf = (path / DOCS_FILE).read_bytes()
    except (KeyError, ValueError) as exc:
        raise IndexFormatError(f"index {path} has unreadable metadata: {exc}") from None
    if analyzer.fingerprint() != meta.get("analyzer"):
        raise IndexFormatError(f"index {path} analyzer fingerprint mismatch")

    ix = FieldIndex(field, analyzer)
    try:
        _decode_into(ix, terms_buf, postings_buf, docs_buf)
    except (IndexError, KeyError, UnicodeDecodeError) as exc:
        raise IndexFormatError(f"index {path} is corrupt: {exc}") from None
    if ix.doc_count != int(meta.get("doc_count", -1)):
        raise IndexFormatError(f"index {path} doc_count does not match meta")
    return ix


def _decode_into(ix: FieldIndex, terms_buf: bytes, postings_buf: bytes, docs_buf: bytes) -> None:
    if not terms_buf.startswith(_TERMS_MAGIC) or not postings_buf.startswith(_POSTINGS_MAGIC):
        raise IndexFormatError("bad magic in term or postings file")
    if not docs_buf.startswith(_DOCS_MAGIC):
        raise IndexFormatError("bad magic in docs file")

    pos = len(_DOCS_MAGIC)
    ndocs, pos = _get(docs_buf, pos)
    recid = 0
    doc_len = ix._doc_len
    reverse = ix._reverse
    for _ in range(ndocs):
        delta, pos = _get(docs_buf, pos)
        recid += delta
        length, pos = _get(docs_buf, pos)
        doc_len[recid] = length
        reverse[recid] = {}
    ix._total_tokens = sum(doc_len.values())

    layout = terms_buf[len(_TERMS_MAGIC)]
    pos = len(_TERMS_MAGIC) + 1
    nterms, pos = _get(terms_buf, pos)
    ppos = len(_POSTINGS_MAGIC)
    prev = b""
    forward = ix._forward
    for _ in range(nterms):
        if layout == _LAYOUT_FRONT_CODED:
            shared, pos = _get(terms_buf, pos)
            n, pos = _get(terms_buf, pos)
            raw = prev[:shared] + terms_buf[pos : pos + n]
            pos += n
            prev = raw
            start = ppos
        elif layout == _LAYOUT_PLAIN:
            n, pos = _get(terms_buf, pos)
            raw = terms_buf[pos : pos + n]
            pos += n
            offset, pos = _get(terms_buf, pos)
            start = len(_POSTINGS_MAGIC) + offset
        else:
            raise IndexFormatError(f"unknown term table layout {layout}")
        df, pos = _get(terms_buf, pos)
        size, pos = _get(terms_buf, pos)
        term = raw.decode("utf-8")

        by_doc: dict[int, tuple[int, ...]] = {}
        p = start
        count, p = _get(postings_buf, p)
        if count != df:
            raise IndexFormatError(f"df mismatch for term {term!r}")
        recid = 0
        for _ in range(count):
            delta, p = _get(postings_buf, p)
            recid += delta
            tf, p = _get(postings_buf, p)
            plist = []
            last = 0
            for _ in range(tf):
                d, p = _get(postings_buf, p)
                last += d
                plist.append(last)
            by_doc[recid] = tuple(plist)
            reverse[recid][term] = tf
        if p != start + size:
            raise IndexFormatError(f"postings block size mismatch for term {term!r}")
        ppos = start + size
        forward[term] = by_doc


def optimize(root: str | Path, field: str) -> IndexStats:
    """Rewrite a saved field index in the compact sorted layout."""
    ix = open_index(root, field)
    return _write(ix, field_dir(root, field), _LAYOUT_FRONT_CODED)


def index_bytes(root: str | Path, field: str) -> int:
    return _dir_bytes(field_dir(root, field))
