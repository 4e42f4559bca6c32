"""Event loop: arrivals, expirations, table maintenance and match dispatch."""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, NamedTuple

from .dag import QueryDag, best_dag, reverse
from .graph import Edge, GraphError, Snapshot, TemporalGraph
from .matcher import Embedding, Matcher, MatchOptions
from .maxmin import CandidateIndex, MaxMinTable, candidate_keys
from .query import QueryError, TemporalQuery, validate_query

__all__ = ["EngineSnapshot", "MatchReport", "StreamEngine", "run", "SUMMARY_KEYS"]

ARRIVAL = "+"
EXPIRATION = "-"

SUMMARY_KEYS = (
    "events_processed",
    "embeddings_occurred",
    "embeddings_expired",
    "search_nodes_visited",
    "candidate_pairs_current",
    "peak_candidate_pairs",
)


class MatchReport(NamedTuple):
    fire_time: int
    polarity: str
    embedding: Embedding | None
    count: int = 1


class EngineSnapshot(NamedTuple):
    graph: Snapshot
    tables: tuple
    index: frozenset


class StreamEngine:
    """Maintains the window, both tables and the candidate index for one query.

    ``sink`` receives :class:`MatchReport` values. ``on_event`` is called after
    every completed event with ``(op, edge, engine)``; tests use it to compare
    against the oracle between events.
    """

    def __init__(
        self,
        query: TemporalQuery,
        window: int,
        vertices: Iterable[tuple[int, str]] | dict = (),
        *,
        directed: bool = False,
        options: MatchOptions | None = None,
        sink: Callable[[MatchReport], None] | None = None,
        on_event: Callable | None = None,
        dag: QueryDag | None = None,
    ):
        problems = validate_query(query)
        if problems:
            raise QueryError(problems)
        if window <= 0:
            raise ValueError("window must be positive")
        self.query = query
        self.window = window
        self.directed = directed
        self.options = options or MatchOptions()
        self.sink = sink
        self.on_event = on_event
        self.graph = TemporalGraph(directed=directed)
        items = vertices.items() if isinstance(vertices, dict) else vertices
        for vid, lab in items:
            self.graph.add_vertex(vid, lab)
        self.dag = dag or best_dag(query)
        self.rdag = reverse(self.dag)
        self.forward = MaxMinTable(self.graph, self.dag, "fwd")
        self.backward = MaxMinTable(self.graph, self.rdag, "rev")
        self.index = CandidateIndex(self.forward, self.backward)
        self.matcher = Matcher(self.graph, query, self.index, options=self.options)
        self._pending: deque[Edge] = deque()
        self._busy = False
        self.now: int | None = None
        self.label_pairs = 0
        self.stats = dict.fromkeys(SUMMARY_KEYS, 0)
        self.last_delta: dict[str, set] = {}

    # -- public -----------------------------------------------------------

    def add_vertex(self, vid: int, label: str) -> None:
        self.graph.add_vertex(vid, label)

    def push(self, src: int, dst: int, ts: int, label: str | None = None) -> None:
        """Feed one arrival, firing every expiration due at or before ``ts`` first."""
        if self.now is not None and ts < self.now:
            raise GraphError(f"timestamp regression: {ts} after {self.now}")
        self._expire_through(ts)
        self._arrive(src, dst, ts, label)

    def finish(self) -> None:
        """Fire all remaining expirations."""
        while self._pending:
            self._expire(self._pending[0])

    def advance(self, t: int) -> None:
        """Fire expirations due at or before ``t`` without an arrival."""
        self._expire_through(t)
        if self.now is None or t > self.now:
            self.now = t

    def summary(self) -> dict:
        out = dict(self.stats)
        out["candidate_pairs_current"] = len(self.index)
        out["peak_candidate_pairs"] = self.index.peak
        return out

    def snapshot(self) -> EngineSnapshot:
        if self._busy:
            raise RuntimeError("snapshot requested while an event is being processed")
        return EngineSnapshot(
            self.graph.freeze(),
            tuple(self.forward.dump() + self.backward.dump()),
            frozenset(self.index.pairs),
        )

    # -- events -----------------------------------------------------------

    def _expire_through(self, t: int) -> None:
        while self._pending and self._pending[0].ts + self.window <= t:
            self._expire(self._pending[0])

    def _report(self, fire: int, polarity: str, edge: Edge) -> None:
        key = "embeddings_occurred" if polarity == ARRIVAL else "embeddings_expired"
        sink = self.sink
        if self.options.count_only:

            def emit(n):
                self.stats[key] += n
                if sink:
                    sink(MatchReport(fire, polarity, None, n))
        else:

            def emit(emb):
                self.stats[key] += 1
                if sink:
                    sink(MatchReport(fire, polarity, emb))

        before = self.matcher.visited
        self.matcher.find_matches(edge, emit)
        self.stats["search_nodes_visited"] += self.matcher.visited - before

    def _arrive(self, src: int, dst: int, ts: int, label: str | None) -> None:
        self._busy = True
        try:
            edge = self.graph.insert_edge(src, dst, ts, label)
            self.now = ts
            self._pending.append(edge)
            self.label_pairs += sum(1 for _ in candidate_keys(self.query, self.graph.labels, edge, self.directed))
            fwd = self.forward.tcm_insertion(edge)
            rev = self.backward.tcm_insertion(edge)
            self.last_delta = {"fwd": fwd, "rev": rev}
            self.index.apply_delta(fwd, rev, +1)
            self._report(ts, ARRIVAL, edge)
            self.stats["events_processed"] += 1
        finally:
            self._busy = False
        if self.on_event:
            self.on_event(ARRIVAL, edge, self)

    def _expire(self, edge: Edge) -> None:
        self._busy = True
        fire = edge.ts + self.window
        try:
            if self.now is None or fire > self.now:
                self.now = fire
            # enumerate while the edge is still present, then tear down
            self._report(fire, EXPIRATION, edge)
            fwd = self.forward.tcm_deletion(edge)
            rev = self.backward.tcm_deletion(edge)
            self.last_delta = {"fwd": fwd, "rev": rev}
            self.index.apply_delta(fwd, rev, -1)
            self.graph.delete_expired(edge)
            self._pending.popleft()
            self.label_pairs -= sum(1 for _ in candidate_keys(self.query, self.graph.labels, edge, self.directed))
            self.stats["events_processed"] += 1
        finally:
            self._busy = False
        if self.on_event:
            self.on_event(EXPIRATION, edge, self)


def run(
    stream: Iterable[tuple],
    query: TemporalQuery,
    window: int,
    sink: Callable[[MatchReport], None] | None = None,
    options: MatchOptions | None = None,
    *,
    vertices=(),
    directed: bool = False,
    on_event: Callable | None = None,
) -> dict:
    """Process ``(src, dst, label, ts)`` arrivals to completion; return the summary."""
    eng = StreamEngine(
        query, window, vertices, directed=directed, options=options, sink=sink, on_event=on_event
    )
    for src, dst, label, ts in stream:
        eng.push(src, dst, ts, label)
    eng.finish()
    return eng.summary()
