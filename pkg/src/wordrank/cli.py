"""Command line entry point: ``wordrank index|search|bench|debug``.

Exit codes: 0 success, 2 usage or validation error, 1 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .analysis import stem
from .bench import BenchPlan, BenchPlanError, fit_linear, run_bench
from .bridge import (
    AnalyzerMismatchError,
    ConfigError,
    UnknownMethodError,
    dumps_config,
    get_method,
    load_config,
    open_indexes,
    prepare_units,
    rank,
)
from .corpus import CorpusError, generate_synthetic, load_corpus, shuffle
from .idset import IdSet
from .index import IndexFormatError, UnknownFieldError
from .indexer import run_indexing, write_message
from .query import QueryParseError, parse, transform
from .rank_vsm import match_units

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2

_VALIDATION_ERRORS = (
    AnalyzerMismatchError,
    BenchPlanError,
    ConfigError,
    CorpusError,
    IndexFormatError,
    QueryParseError,
    UnknownFieldError,
    UnknownMethodError,
)


class UsageError(Exception):
    pass


def _existing_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def read_hitset(path: str | Path) -> IdSet:
    """One record id per line; blank lines and ``#`` comments are skipped."""
    ids = IdSet()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            recid = int(line)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: not a record id: {line!r}") from None
        if recid <= 0:
            raise UsageError(f"{path}:{lineno}: record ids must be positive")
        ids.add(recid)
    return ids


# -- commands -----------------------------------------------------------------------


def cmd_index(args: argparse.Namespace) -> int:
    corpus = load_corpus(_existing_file(args.corpus, "corpus file"))
    cfg = load_config(_existing_file(args.config, "config file"))
    if args.flush_every < 0:
        raise UsageError("--flush-every must be >= 0")
    message = (lambda msg: None) if args.quiet else write_message
    report = run_indexing(corpus, cfg.function, args.index_dir, cfg, args.flush_every, message)
    print(report.summary())
    return EXIT_OK


def cmd_search(args: argparse.Namespace) -> int:
    cfg = load_config(_existing_file(args.config, "config file"))
    if args.top is not None and args.top < 0:
        raise UsageError("--top must be >= 0")
    units = prepare_units(cfg, args.query, args.field)
    indexes = open_indexes(args.index_dir, sorted({u.field for u in units}))
    if args.hitset:
        hitset = read_hitset(_existing_file(args.hitset, "hitset file"))
    else:
        hitset = match_units(indexes, units)
    result = rank(cfg, args.query, hitset, indexes, args.field)
    entries = result.descending()
    if args.top is not None:
        entries = entries[: args.top]
    for recid, score in entries:
        print(f"{recid}\t{result.prologue}{score}{result.epilogue}")
    if args.verbose:
        sys.stderr.write(result.voutput)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    get_method(args.engine)
    if args.parts < 1:
        raise UsageError("--parts must be >= 1")
    if args.synthetic is not None:
        if args.synthetic < args.parts:
            raise UsageError("--synthetic must be at least --parts")
        corpus = generate_synthetic(args.synthetic, args.seed)
    else:
        corpus = load_corpus(_existing_file(args.corpus, "corpus file"))
        if args.seed is not None:
            corpus = shuffle(corpus, args.seed)
    part_size = args.part_size or len(corpus) // args.parts
    plan = BenchPlan(parts=args.parts, part_size=part_size, repetitions=args.repetitions)
    cfg = load_config(_existing_file(args.config, "config file")) if args.config else None
    rows = run_bench(
        corpus, plan, args.engine, args.out, cfg=cfg,
        message=lambda msg: print(msg, file=sys.stderr, flush=True),
    )
    if len(rows) >= 3:
        metrics = ["index_seconds", "index_bytes"]
        metrics += [f"{m}:{q}" for q in plan.term_queries for m in ("search_ms", "rank_ms")]
        for metric in metrics:
            slope, intercept, r2 = fit_linear(rows, metric)
            print(f"{metric}\tslope={slope:.6g}\tintercept={intercept:.6g}\tr2={r2:.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_debug(args: argparse.Namespace) -> int:
    if args.what == "stem":
        print(stem(args.word.lower()))
    elif args.what == "parse":
        for u in parse(args.query, args.field):
            print(f"{u.operator}\t{u.field}\t{u.kind}\t{u.pattern}")
    elif args.what == "transform":
        cfg = load_config(_existing_file(args.config, "config file"))
        print(transform(args.query, cfg.field_settings, args.field))
    elif args.what == "config":
        cfg = load_config(_existing_file(args.config, "config file"))
        sys.stdout.write(dumps_config(cfg))
        print(f"# analyzer fingerprint: {cfg.analyzer.fingerprint()}")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wordrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="index a JSON-lines corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index-dir", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--flush-every", type=int, default=0, metavar="N")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="match and rank a query")
    p.add_argument("--query", required=True)
    p.add_argument("--index-dir", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--top", type=int, metavar="N")
    p.add_argument("--hitset", metavar="FILE", help="rank these ids instead of the boolean matches")
    p.add_argument("--field", help="ambient field for unprefixed words (default: config default_field)")
    p.add_argument("-v", "--verbose", action="store_true", help="print engine diagnostics to stderr")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("bench", help="run the scalability benchmark")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus")
    src.add_argument("--synthetic", type=int, metavar="N")
    p.add_argument("--parts", type=int, required=True, metavar="K")
    p.add_argument("--part-size", type=int, metavar="M", help="records per part (default: corpus size / K)")
    p.add_argument("--engine", required=True)
    p.add_argument("--out", required=True, metavar="CSV")
    p.add_argument("--seed", type=int, metavar="S")
    p.add_argument("--config")
    p.add_argument("--repetitions", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("debug", help="inspection helpers")
    dsub = p.add_subparsers(dest="what", required=True)
    d = dsub.add_parser("stem")
    d.add_argument("word")
    d = dsub.add_parser("parse")
    d.add_argument("query", nargs="?", default="")
    d.add_argument("--query", dest="query_opt")
    d.add_argument("--field", default="fulltext")
    d = dsub.add_parser("transform")
    d.add_argument("--query", required=True)
    d.add_argument("--config", required=True)
    d.add_argument("--field")
    d = dsub.add_parser("config")
    d.add_argument("--config", required=True)
    p.set_defaults(func=cmd_debug)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(args, "what", None) == "parse" and args.query_opt is not None:
        args.query = args.query_opt
    if args.command == "bench" and args.synthetic is not None and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (UsageError, *_VALIDATION_ERRORS) as exc:
        print(f"wordrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"wordrank: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
