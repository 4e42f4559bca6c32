"""Differential runs of the engine against the brute-force oracle."""

from __future__ import annotations

import gc
from dataclasses import dataclass, field

from .engine import ARRIVAL, StreamEngine
from .matcher import MatchOptions
from .oracle import enumerate_all, matchable_reference, maxmin_reference, weak_embedding_sites
from .query import TemporalQuery

__all__ = ["Mismatch", "CheckResult", "oracle_check", "table_mismatches"]


@dataclass
class Mismatch:
    event: int
    op: str
    seq: int
    missing: set
    extra: set

    def __str__(self) -> str:
        return (
            f"event {self.event} ({self.op} seq {self.seq}): "
            f"{len(self.missing)} missing, {len(self.extra)} unexpected"
        )


@dataclass
class CheckResult:
    mismatches: list = field(default_factory=list)
    table_errors: list = field(default_factory=list)
    events: int = 0
    max_active: int = 0
    reports: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    label_pairs: list = field(default_factory=list)
    index_pairs: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.table_errors


def table_mismatches(engine: StreamEngine) -> list[str]:
    """Stored values and matchable sets that differ from a from-scratch recompute."""
    snap = engine.graph.freeze()
    errors = []
    for table in (engine.forward, engine.backward):
        ref = maxmin_reference(snap, table.dag, engine.directed)
        for (u, v, e, s), want in ref.items():
            got = table.value(u, v, e, s)
            if got != want:
                errors.append(f"{table.name} T[{u},{v},{e},{s:+d}] = {got}, expected {want}")
        stored = {(u, v) for u, ent in table.entries.items() for v in ent}
        sites = weak_embedding_sites(snap, table.dag, engine.directed)
        if stored != sites:
            errors.append(
                f"{table.name} entries at {sorted(stored - sites)} lack a weak embedding; "
                f"{sorted(sites - stored)} are missing"
            )
        want_m = matchable_reference(snap, table.dag, engine.directed)
        if want_m != table.matchable:
            errors.append(
                f"{table.name} matchable set off by "
                f"{len(want_m - table.matchable)} missing, {len(table.matchable - want_m)} extra"
            )
    both = engine.forward.matchable & engine.backward.matchable
    if both != engine.index.pairs:
        errors.append("candidate index is not the intersection of both matchable sets")
    return errors


def oracle_check(
    vertices: dict,
    edges,
    query: TemporalQuery,
    window: int,
    *,
    directed: bool = False,
    options: MatchOptions | None = None,
    check_tables: bool = False,
    max_edges: int | None = None,
    stop_on_first: bool = False,
    full_snapshots: bool = True,
    keep_reports: bool = False,
) -> CheckResult:
    """Run the engine and compare each event's reports with oracle snapshot diffs.

    ``full_snapshots=False`` enumerates only the embeddings through the
    event's edge, on the snapshot that contains it; the answer is the same
    and far cheaper when snapshots hold many embeddings. ``keep_reports``
    retains each event's report set in ``result.reports``.
    """
    result = CheckResult()
    current: dict[str, set] = {"+": set(), "-": set()}
    state = {"prev": set(), "prev_snap": None}

    vids = sorted(query.vertex_ids)
    eids = sorted(query.edge_ids)

    def sink(rep):
        vm, em = rep.embedding.vmap, rep.embedding.emap
        key = (tuple(zip(vids, [vm[u] for u in vids])), tuple(zip(eids, [em[e].seq for e in eids])))
        bucket = current[rep.polarity]
        if key in bucket:
            bucket.add(("duplicate", key))
        bucket.add(key)

    def on_event(op, edge, eng):
        result.events += 1
        result.max_active = max(result.max_active, eng.graph.num_edges)
        snap = eng.graph.freeze()
        if full_snapshots:
            after = enumerate_all(snap, query, directed)
            before = state["prev"]
            want = after - before if op == ARRIVAL else before - after
            state["prev"] = after
        else:
            # the one-edge difference between snapshots is what runs through that edge
            source = snap if op == ARRIVAL else state["prev_snap"]
            want = enumerate_all(source, query, directed, through=edge.seq)
        state["prev_snap"] = snap
        got = current["+"] if op == ARRIVAL else current["-"]
        stray = current["-"] if op == ARRIVAL else current["+"]
        if want != got or stray:
            result.mismatches.append(
                Mismatch(result.events, op, edge.seq, want - got, (got - want) | stray)
            )
        if keep_reports:
            result.reports.append((op, edge.seq, frozenset(got)))
        result.label_pairs.append(eng.label_pairs)
        result.index_pairs.append(len(eng.index))
        if check_tables:
            result.table_errors.extend(f"event {result.events}: {m}" for m in table_mismatches(eng))
        current["+"], current["-"] = set(), set()
        if stop_on_first and not result.ok:
            raise _Abort

    eng = StreamEngine(
        query, window, vertices, directed=directed, options=options, sink=sink, on_event=on_event
    )
    # millions of small key tuples make the cyclic collector rescan for nothing
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for i, rec in enumerate(edges):
            if max_edges is not None and i >= max_edges:
                break
            src, dst, label, ts = rec
            eng.push(src, dst, ts, label)
        eng.finish()
    except _Abort:
        pass
    finally:
        if was_enabled:
            gc.enable()
    result.summary = eng.summary()
    return result


class _Abort(Exception):
    pass
