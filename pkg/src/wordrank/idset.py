"""Compressed set of positive record ids.

Ids are split into a high part (the container key) and a low 16-bit part.
Each non-empty container is a Python int used as a 65536-bit bitmap, so sparse
id ranges cost nothing and dense ranges cost one bit per id.
"""

from __future__ import annotations

import struct
from typing import Iterable, Iterator

CHUNK_BITS = 16
CHUNK_MASK = (1 << CHUNK_BITS) - 1
FORMAT_TAG = 1

_HEADER = struct.Struct("<BI")
_CHUNK = struct.Struct("<QH")
_BYTE_OFFSETS = tuple(tuple(i for i in range(8) if value >> i & 1) for value in range(256))


class IdSet:
    """Set of positive integer record ids with ascending iteration.

    Set algebra returns new instances; ``add``/``discard`` exist for
    construction and mutate in place.
    """

    __slots__ = ("_chunks", "_views")

    def __init__(self, ids: Iterable[int] = ()) -> None:
        self._chunks: dict[int, int] = _build_chunks(ids)
        self._views: dict[int, bytes] = {}

    @classmethod
    def _from_chunks(cls, chunks: dict[int, int]) -> IdSet:
        out = cls.__new__(cls)
        out._chunks = {key: bits for key, bits in chunks.items() if bits}
        out._views = {}
        return out

    @classmethod
    def from_sorted(cls, ids: Iterable[int]) -> IdSet:
        """Build from ids in any order; kept as the explicit bulk constructor."""
        return cls._from_chunks(_build_chunks(ids))

    def add(self, recid: int) -> None:
        _check_id(recid)
        key = recid >> CHUNK_BITS
        self._chunks[key] = self._chunks.get(key, 0) | (1 << (recid & CHUNK_MASK))
        self._views.pop(key, None)

    def discard(self, recid: int) -> None:
        _check_id(recid)
        key = recid >> CHUNK_BITS
        bits = self._chunks.get(key, 0) & ~(1 << (recid & CHUNK_MASK))
        self._views.pop(key, None)
        if bits:
            self._chunks[key] = bits
        else:
            self._chunks.pop(key, None)

    def _view(self, key: int) -> bytes:
        """Little-endian bytes of one bitmap, cached so lookups avoid big-int shifts."""
        view = self._views.get(key)
        if view is None:
            bits = self._chunks.get(key, 0)
            view = bits.to_bytes((bits.bit_length() + 7) // 8, "little")
            self._views[key] = view
        return view

    def __contains__(self, recid: object) -> bool:
        if not isinstance(recid, int) or isinstance(recid, bool):
            return False
        _check_id(recid)
        key = recid >> CHUNK_BITS
        if key not in self._chunks:
            return False
        view = self._view(key)
        low = recid & CHUNK_MASK
        byte = low >> 3
        return byte < len(view) and bool(view[byte] >> (low & 7) & 1)

    def contains(self, recid: int) -> bool:
        return recid in self

    def __len__(self) -> int:
        return sum(bits.bit_count() for bits in self._chunks.values())

    def __bool__(self) -> bool:
        return bool(self._chunks)

    def __iter__(self) -> Iterator[int]:
        for key in sorted(self._chunks):
            base = key << CHUNK_BITS
            for i, byte in enumerate(self._view(key)):
                if byte:
                    start = base + (i << 3)
                    for offset in _BYTE_OFFSETS[byte]:
                        yield start + offset

    def __eq__(self, other: object) -> bool:
        if isinstance(other, IdSet):
            return self._chunks == other._chunks
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._chunks.items()))

    def __repr__(self) -> str:
        ids = list(self)
        if len(ids) > 10:
            shown = ", ".join(map(str, ids[:10])) + ", ..."
        else:
            shown = ", ".join(map(str, ids))
        return f"IdSet([{shown}])"

    def union(self, other: IdSet) -> IdSet:
        chunks = dict(self._chunks)
        for key, bits in other._chunks.items():
            chunks[key] = chunks.get(key, 0) | bits
        return IdSet._from_chunks(chunks)

    def intersection(self, other: IdSet) -> IdSet:
        small, large = sorted((self._chunks, other._chunks), key=len)
        return IdSet._from_chunks(
            {key: bits & large[key] for key, bits in small.items() if key in large}
        )

    def difference(self, other: IdSet) -> IdSet:
        return IdSet._from_chunks(
            {key: bits & ~other._chunks.get(key, 0) for key, bits in self._chunks.items()}
        )

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def copy(self) -> IdSet:
        return IdSet._from_chunks(self._chunks)

    def max(self) -> int:
        if not self._chunks:
            raise ValueError("max() of an empty IdSet")
        key = max(self._chunks)
        return (key << CHUNK_BITS) + self._chunks[key].bit_length() - 1

    def to_bytes(self) -> bytes:
        """Serialize as ``tag | payload length | chunks``.

        A chunk is its key, the bitmap byte length and the little-endian
        bitmap bytes.
        """
        parts = []
        for key in sorted(self._chunks):
            bits = self._chunks[key]
            raw = bits.to_bytes((bits.bit_length() + 7) // 8, "little")
            parts.append(_CHUNK.pack(key, len(raw)))
            parts.append(raw)
        payload = b"".join(parts)
        return _HEADER.pack(FORMAT_TAG, len(payload)) + payload

    @classmethod
    def from_bytes(cls, blob: bytes) -> IdSet:
        if len(blob) < _HEADER.size:
            raise ValueError("IdSet blob too short")
        tag, length = _HEADER.unpack_from(blob)
        if tag != FORMAT_TAG:
            raise ValueError(f"unsupported IdSet format tag {tag}")
        if len(blob) != _HEADER.size + length:
            raise ValueError("IdSet blob length mismatch")
        chunks: dict[int, int] = {}
        pos = _HEADER.size
        while pos < len(blob):
            if pos + _CHUNK.size > len(blob):
                raise ValueError("truncated IdSet chunk header")
            key, size = _CHUNK.unpack_from(blob, pos)
            pos += _CHUNK.size
            if pos + size > len(blob) or size > (1 << CHUNK_BITS) // 8:
                raise ValueError("truncated IdSet chunk")
            chunks[key] = int.from_bytes(blob[pos : pos + size], "little")
            pos += size
        result = cls._from_chunks(chunks)
        if 0 in result._chunks and result._chunks[0] & 1:
            raise ValueError("IdSet blob contains id 0")
        return result


def _build_chunks(ids: Iterable[int]) -> dict[int, int]:
    """Group ids by container and set their bits through a bytearray.

    Setting bits one at a time on a Python int would copy the whole bitmap
    for every id.
    """
    grouped: dict[int, list[int]] = {}
    for recid in ids:
        _check_id(recid)
        grouped.setdefault(recid >> CHUNK_BITS, []).append(recid & CHUNK_MASK)
    chunks = {}
    for key, lows in grouped.items():
        buf = bytearray((max(lows) >> 3) + 1)
        for low in lows:
            buf[low >> 3] |= 1 << (low & 7)
        chunks[key] = int.from_bytes(buf, "little")
    return chunks


def _check_id(recid: int) -> None:
    if recid <= 0:
        raise ValueError(f"record ids must be positive, got {recid}")
