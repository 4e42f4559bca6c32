"""Line-oriented text formats for streams, queries and match reports.

Stream::

    v <id> <label>
    e <src> <dst> <elabel|-> <ts>

Query::

    v <id> <label>
    e <eid> <src> <dst> <elabel|->
    o <eid1> <eid2>          # eid1 must come strictly before eid2

Blank lines and ``#`` comments are ignored; CRLF endings are accepted.
"""

from __future__ import annotations

import os
from typing import Iterable, NamedTuple

from .query import QueryEdge, QueryError, TemporalQuery

__all__ = [
    "ParseError",
    "StreamData",
    "parse_stream",
    "parse_stream_text",
    "parse_query",
    "parse_query_text",
    "format_stream",
    "format_query",
    "format_report",
]


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None, source: str = "<text>"):
        self.line = line
        self.column = column
        self.source = source
        where = source
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {msg}")


class StreamData(NamedTuple):
    vertices: dict[int, str]
    edges: list[tuple[int, int, str | None, int]]  # (src, dst, elabel, ts)


def _read(path_or_text) -> tuple[str, str]:
    if isinstance(path_or_text, (str, os.PathLike)) and os.path.exists(path_or_text):
        with open(path_or_text, encoding="utf-8", newline="") as fh:
            return fh.read(), str(path_or_text)
    raise FileNotFoundError(path_or_text)


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip("\r")
        toks = line.split()
        if not toks:
            continue
        cols = []
        at = 0
        for t in toks:
            at = line.index(t, at)
            cols.append(at + 1)
            at += len(t)
        yield lineno, toks, cols


def _int(tok: str, lineno: int, col: int, source: str, what: str) -> int:
    try:
        x = int(tok, 10)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {tok!r}", lineno, col, source) from None
    if x < 0:
        raise ParseError(f"{what} must be non-negative", lineno, col, source)
    return x


def _label(tok: str) -> str | None:
    return None if tok == "-" else tok


def parse_stream_text(text: str, source: str = "<text>") -> StreamData:
    vertices: dict[int, str] = {}
    edges = []
    last_ts = None
    for lineno, toks, cols in _tokens(text):
        kind = toks[0]
        if kind == "v":
            if len(toks) != 3:
                raise ParseError("expected 'v <id> <label>'", lineno, 1, source)
            vid = _int(toks[1], lineno, cols[1], source, "vertex id")
            if vid in vertices:
                raise ParseError(f"duplicate vertex id {vid}", lineno, cols[1], source)
            vertices[vid] = toks[2]
        elif kind == "e":
            if len(toks) != 5:
                raise ParseError("expected 'e <src> <dst> <elabel|-> <ts>'", lineno, 1, source)
            src = _int(toks[1], lineno, cols[1], source, "source id")
            dst = _int(toks[2], lineno, cols[2], source, "target id")
            ts = _int(toks[4], lineno, cols[4], source, "timestamp")
            for vid, col in ((src, cols[1]), (dst, cols[2])):
                if vid not in vertices:
                    raise ParseError(f"edge references undeclared vertex {vid}", lineno, col, source)
            if last_ts is not None and ts < last_ts:
                raise ParseError(f"timestamp {ts} goes back from {last_ts}", lineno, cols[4], source)
            last_ts = ts
            edges.append((src, dst, _label(toks[3]), ts))
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno, cols[0], source)
    return StreamData(vertices, edges)


def parse_stream(path) -> StreamData:
    text, source = _read(path)
    return parse_stream_text(text, source)


def parse_query_text(text: str, source: str = "<text>") -> TemporalQuery:
    vertices: dict[int, str] = {}
    edges: list[QueryEdge] = []
    order = []
    for lineno, toks, cols in _tokens(text):
        kind = toks[0]
        if kind == "v":
            if len(toks) != 3:
                raise ParseError("expected 'v <id> <label>'", lineno, 1, source)
            vid = _int(toks[1], lineno, cols[1], source, "vertex id")
            if vid in vertices:
                raise ParseError(f"duplicate vertex id {vid}", lineno, cols[1], source)
            vertices[vid] = toks[2]
        elif kind == "e":
            if len(toks) != 5:
                raise ParseError("expected 'e <eid> <src> <dst> <elabel|->'", lineno, 1, source)
            eid = _int(toks[1], lineno, cols[1], source, "edge id")
            src = _int(toks[2], lineno, cols[2], source, "source id")
            dst = _int(toks[3], lineno, cols[3], source, "target id")
            edges.append(QueryEdge(eid, src, dst, _label(toks[4])))
        elif kind == "o":
            if len(toks) != 3:
                raise ParseError("expected 'o <eid1> <eid2>'", lineno, 1, source)
            order.append(
                (
                    _int(toks[1], lineno, cols[1], source, "edge id"),
                    _int(toks[2], lineno, cols[2], source, "edge id"),
                )
            )
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno, cols[0], source)
    try:
        return TemporalQuery(vertices, edges, order)
    except QueryError as exc:
        raise ParseError(str(exc), source=source) from exc


def parse_query(path) -> TemporalQuery:
    text, source = _read(path)
    return parse_query_text(text, source)


def format_stream(vertices: dict[int, str], edges: Iterable[tuple]) -> str:
    lines = [f"v {vid} {lab}" for vid, lab in sorted(vertices.items())]
    for src, dst, label, ts in edges:
        lines.append(f"e {src} {dst} {label if label is not None else '-'} {ts}")
    return "\n".join(lines) + "\n"


def format_query(q: TemporalQuery) -> str:
    lines = [f"v {vid} {q.labels[vid]}" for vid in q.vertex_ids]
    for eid in q.edge_ids:
        e = q.edges[eid]
        lines.append(f"e {eid} {e.src} {e.dst} {e.label if e.label is not None else '-'}")
    for a, b in q.order.direct_pairs:
        lines.append(f"o {a} {b}")
    return "\n".join(lines) + "\n"


def format_report(report, query: TemporalQuery, running_total: int | None = None) -> str:
    """``<fire_time> <+|-> <eid>:<src>-<dst>@<ts>,...``; count mode prints a running total."""
    if report.embedding is None:
        return f"{report.fire_time} {report.polarity} {running_total}"
    vmap = report.embedding.vmap
    parts = []
    for eid in sorted(report.embedding.emap):
        e = report.embedding.emap[eid]
        qe = query.edges[eid]
        parts.append(f"{eid}:{vmap[qe.src]}-{vmap[qe.dst]}@{e.ts}")
    return f"{report.fire_time} {report.polarity} {','.join(parts)}"
