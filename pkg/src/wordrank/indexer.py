"""Batch indexing of a corpus into one FieldIndex per ranking field."""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .bridge import RankMethodConfig, get_method
from .corpus import STANDARD_FIELDS, Corpus
from .index import FieldIndex, IndexFormatError, IndexStats, mark_partial, open_index, read_meta, save

Messenger = Callable[[str], None]


def write_message(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _quiet(msg: str) -> None:
    pass


@dataclass
class IndexingReport:
    records_indexed: int
    duration: float
    stats: dict[str, IndexStats] = field(default_factory=dict)

    @property
    def records_per_second(self) -> float:
        return self.records_indexed / self.duration if self.duration > 0 else 0.0

    def summary(self) -> str:
        lines = [
            f"records indexed: {self.records_indexed}",
            f"duration: {self.duration:.3f} s ({self.records_per_second:.1f} records/s)",
        ]
        for name, st in sorted(self.stats.items()):
            lines.append(
                f"  {name}: {st.distinct_terms} terms, {st.total_postings} postings, {st.bytes_on_disk} bytes"
            )
        return "\n".join(lines)


def indexed_fields(cfg: RankMethodConfig) -> list[str]:
    """The five standard fields plus any extra field named in the config."""
    names = list(STANDARD_FIELDS)
    names += [f for f in cfg.fields if f not in names]
    return names


class RankingIndexer:
    """Holds the writable field indexes under ``index_root`` between flushes."""

    def __init__(self, index_root: str | Path, cfg: RankMethodConfig, resume: bool = True) -> None:
        self.root = Path(index_root)
        self.cfg = cfg
        self.fields = indexed_fields(cfg)
        self.indexes: dict[str, FieldIndex] = {}
        for name in self.fields:
            ix = None
            if resume:
                try:
                    read_meta(self.root, name)
                except IndexFormatError:
                    pass
                else:
                    ix = open_index(self.root, name)
                    if ix.analyzer.fingerprint() != cfg.analyzer.fingerprint():
                        raise IndexFormatError(
                            f"existing index {name!r} was built with a different analyzer"
                        )
            self.indexes[name] = ix or FieldIndex(name, cfg.analyzer)

    def add_corpus(self, corpus: Corpus, flush_every: int = 0, message: Messenger = _quiet) -> int:
        """Index records in id order; flush every ``flush_every`` records (0: never)."""
        count = 0
        for record in sorted(corpus.records, key=lambda r: r.id):
            for name, ix in self.indexes.items():
                ix.add_document(record.id, record.field_text(name))
            count += 1
            if flush_every and count % flush_every == 0:
                self.flush()
                message(f"{count} records indexed")
        return count

    def flush(self) -> dict[str, IndexStats]:
        stats = {}
        for name, ix in self.indexes.items():
            try:
                stats[name] = save(ix, self.root)
            except OSError:
                try:
                    mark_partial(self.root, name)
                except OSError:
                    pass
                raise
        return stats


def run_indexing(
    corpus: Corpus,
    engine: str,
    index_root: str | Path,
    cfg: RankMethodConfig,
    flush_every: int = 0,
    message: Messenger = write_message,
) -> IndexingReport:
    """Index every record of ``corpus`` and flush once at the end (or every N records)."""
    get_method(engine)
    start = time.perf_counter()
    message("ranking indexer called")
    indexer = RankingIndexer(index_root, cfg)
    count = indexer.add_corpus(corpus, flush_every, message)
    stats = indexer.flush()
    message(f"{count} records indexed")
    message("ranking indexer completed")
    return IndexingReport(count, time.perf_counter() - start, stats)

