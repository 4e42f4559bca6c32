"""Command-line entry point: match, generate, oracle-check, bench."""

from __future__ import annotations

import argparse
import multiprocessing as mp
import os
import sys
import time
from pathlib import Path

from .engine import SUMMARY_KEYS, StreamEngine
from .graph import GraphError, Snapshot
from .io import ParseError, format_query, format_report, parse_query, parse_stream
from .matcher import MatchOptions
from .query import QueryError
from .verify import oracle_check
from .workload import WalkError, generate_query, synth_stream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_MISMATCH = 3
EXIT_TIMEOUT = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _Enough(Exception):
    pass


def _positive(text: str) -> int:
    x = int(text)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return x


def _density(text: str) -> float:
    x = float(text)
    if not 0 <= x <= 1:
        raise argparse.ArgumentTypeError(f"density must lie in [0, 1], got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tcmatch", description="Continuous time-constrained subgraph matching.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("match", help="stream a data file and print embeddings as they occur and expire")
    m.add_argument("--data", required=True)
    m.add_argument("--query", required=True)
    m.add_argument("--window", required=True, type=_positive)
    m.add_argument("--directed", action="store_true")
    m.add_argument("--count", action="store_true", help="print running totals instead of mappings")
    m.add_argument("--limit", type=_positive, help="stop after this many report lines")
    m.add_argument("--no-filter", action="store_true")
    m.add_argument("--no-prune", action="store_true")
    m.add_argument("--stats", action="store_true", help="print key=value counters to stderr")

    g = sub.add_parser("generate", help="synthetic streams and random-walk queries")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gs = gsub.add_parser("stream")
    gs.add_argument("--seed", type=int, required=True)
    gs.add_argument("--vertices", type=_positive, default=100)
    gs.add_argument("--edges", type=int, default=1000)
    gs.add_argument("--labels", type=_positive, default=4)
    gs.add_argument("--parallel-rate", type=float, default=0.0)
    gs.add_argument("--out")
    gq = gsub.add_parser("query")
    gq.add_argument("--seed", type=int, required=True)
    gq.add_argument("--data", required=True)
    gq.add_argument("--size", type=_positive, required=True)
    gq.add_argument("--density", type=_density, default=0.0)
    gq.add_argument("--window", type=_positive, help="walk only edges alive in this window")
    gq.add_argument("--at", type=int, help="window end (default: last timestamp)")
    gq.add_argument("--out")

    o = sub.add_parser("oracle-check", help="compare the engine with brute force after every event")
    o.add_argument("--data", required=True)
    o.add_argument("--query", required=True)
    o.add_argument("--window", required=True, type=_positive)
    o.add_argument("--max-edges", type=int)
    o.add_argument("--directed", action="store_true")
    o.add_argument("--tables", action="store_true", help="also recheck every table entry")

    b = sub.add_parser("bench", help="run every query in a directory and print one stats block each")
    b.add_argument("--data", required=True)
    b.add_argument("--query-dir", required=True)
    b.add_argument("--window", required=True, type=_positive)
    b.add_argument("--timeout", type=float, default=600.0)
    b.add_argument("--directed", action="store_true")
    b.add_argument("--no-filter", action="store_true")
    b.add_argument("--no-prune", action="store_true")
    return p


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _print_stats(stats: dict, stream) -> None:
    for k in SUMMARY_KEYS:
        print(f"{k}={stats[k]}", file=stream)
    for k, v in stats.items():
        if k not in SUMMARY_KEYS:
            print(f"{k}={v}", file=stream)


def cmd_match(args) -> int:
    data = parse_stream(args.data)
    query = parse_query(args.query)
    options = MatchOptions(
        count_only=args.count, disable_filter=args.no_filter, disable_pruning=args.no_prune
    )
    out = sys.stdout
    totals = {"+": 0, "-": 0}
    lines = [0]

    def sink(rep):
        if rep.embedding is None:
            totals[rep.polarity] += rep.count
            out.write(format_report(rep, query, totals[rep.polarity]) + "\n")
        else:
            out.write(format_report(rep, query) + "\n")
        lines[0] += 1
        if args.limit is not None and lines[0] >= args.limit:
            raise _Enough

    eng = StreamEngine(query, args.window, data.vertices, directed=args.directed, options=options, sink=sink)
    start = time.perf_counter()
    try:
        for src, dst, label, ts in data.edges:
            eng.push(src, dst, ts, label)
        eng.finish()
    except _Enough:
        pass
    if args.stats:
        stats = eng.summary()
        stats["elapsed_seconds"] = round(time.perf_counter() - start, 6)
        _print_stats(stats, sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "stream":
        _write(synth_stream(args.vertices, args.edges, args.labels, args.parallel_rate, args.seed), args.out)
        return EXIT_OK
    data = parse_stream(args.data)
    edges = list(enumerate(data.edges))
    if args.window is not None and edges:
        end = args.at if args.at is not None else edges[-1][1][3]
        edges = [(i, e) for i, e in edges if end - args.window < e[3] <= end]
    snap = Snapshot(
        tuple(sorted(data.vertices.items())),
        tuple((s, d, lab, ts, i) for i, (s, d, lab, ts) in edges),
    )
    query, _ = generate_query(snap, args.size, args.density, args.seed)
    _write(format_query(query), args.out)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    data = parse_stream(args.data)
    query = parse_query(args.query)
    res = oracle_check(
        data.vertices,
        data.edges,
        query,
        args.window,
        directed=args.directed,
        check_tables=args.tables,
        max_edges=args.max_edges,
        full_snapshots=False,
    )
    print(f"events={res.events}")
    print(f"mismatches={len(res.mismatches)}")
    print(f"table_errors={len(res.table_errors)}")
    for m in res.mismatches[:10]:
        print(f"mismatch: {m}", file=sys.stderr)
    for t in res.table_errors[:10]:
        print(f"table: {t}", file=sys.stderr)
    return EXIT_OK if res.ok else EXIT_MISMATCH


def _bench_one(conn, data, query, window, directed, options) -> None:
    start = time.perf_counter()
    eng = StreamEngine(query, window, data.vertices, directed=directed, options=options)
    for src, dst, label, ts in data.edges:
        eng.push(src, dst, ts, label)
    eng.finish()
    stats = eng.summary()
    stats["elapsed_seconds"] = round(time.perf_counter() - start, 6)
    conn.send(stats)
    conn.close()


def cmd_bench(args) -> int:
    data = parse_stream(args.data)
    qdir = Path(args.query_dir)
    if not qdir.is_dir():
        raise FileNotFoundError(args.query_dir)
    paths = sorted(p for p in qdir.iterdir() if p.is_file())
    queries = [(p, parse_query(p)) for p in paths]
    options = MatchOptions(count_only=True, disable_filter=args.no_filter, disable_pruning=args.no_prune)
    code = EXIT_OK
    ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
    for path, query in queries:
        recv, send = ctx.Pipe(duplex=False)
        proc = ctx.Process(target=_bench_one, args=(send, data, query, args.window, args.directed, options))
        proc.start()
        send.close()
        ok = recv.poll(args.timeout)
        print(f"[{path.name}]")
        if ok:
            _print_stats(recv.recv(), sys.stdout)
            print("status=ok")
        else:
            print("status=timeout")
            code = EXIT_TIMEOUT
        print()
        sys.stdout.flush()
        if proc.is_alive():
            proc.terminate()
        proc.join()
    return code


COMMANDS = {
    "match": cmd_match,
    "generate": cmd_generate,
    "oracle-check": cmd_oracle_check,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParseError, QueryError, GraphError, FileNotFoundError) as exc:
        print(f"tcmatch: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except WalkError as exc:
        print(f"tcmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # downstream closed early, e.g. piping into head
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
