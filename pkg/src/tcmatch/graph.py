"""Windowed temporal multigraph with chronological adjacency.

Edges arrive in nondecreasing timestamp order and expire in the same order,
so every adjacency list is a deque: arrivals append at the tail and
expirations pop from the head.
"""

from __future__ import annotations

from collections import deque
from typing import Iterator, NamedTuple


class GraphError(ValueError):
    """Raised on invalid graph mutations."""


class TimestampRegression(GraphError):
    pass


class DataVertex(NamedTuple):
    id: int
    label: str


class Snapshot(NamedTuple):
    """Immutable copy of the active graph: ``(id, label)`` pairs and edge tuples."""

    labels: tuple
    edges: tuple  # (src, dst, label, ts, seq) in arrival order


class Edge:
    """A timestamped data edge. Identity is the arrival sequence number."""

    __slots__ = ("src", "dst", "label", "ts", "seq")

    def __init__(self, src: int, dst: int, ts: int, label: str | None = None, seq: int = -1):
        self.src = src
        self.dst = dst
        self.ts = ts
        self.label = label
        self.seq = seq

    def other(self, v: int) -> int:
        return self.dst if v == self.src else self.src

    def as_tuple(self) -> tuple:
        return (self.src, self.dst, self.label, self.ts, self.seq)

    def __repr__(self) -> str:
        lab = "" if self.label is None else f", {self.label!r}"
        return f"Edge({self.src}, {self.dst}, {self.ts}{lab}, seq={self.seq})"


_ANY = object()


class TemporalGraph:
    """Vertex-labeled temporal multigraph.

    Vertices never expire. Parallel edges between the same pair are kept in
    arrival order, which is also timestamp order.

    Parameters
    ----------
    directed : bool
        When true, :meth:`edges_between` only reports edges leaving the first
        argument. Storage is shared; direction is a per-edge attribute.
    """

    def __init__(self, directed: bool = False):
        self.directed = directed
        self.labels: dict[int, str] = {}
        self._adj: dict[int, deque[Edge]] = {}
        # vertex -> neighbor -> chronological edges between the two
        self._nbrs: dict[int, dict[int, deque[Edge]]] = {}
        self._next_seq = 0
        self._active = 0

    # -- vertices ---------------------------------------------------------

    def add_vertex(self, vid: int, label: str) -> DataVertex:
        if vid in self.labels:
            raise GraphError(f"duplicate vertex id {vid}")
        self.labels[vid] = label
        self._adj[vid] = deque()
        self._nbrs[vid] = {}
        return DataVertex(vid, label)

    def has_vertex(self, vid: int) -> bool:
        return vid in self.labels

    def label(self, vid: int) -> str:
        return self.labels[vid]

    def vertices(self) -> Iterator[DataVertex]:
        for vid, lab in self.labels.items():
            yield DataVertex(vid, lab)

    def degree(self, vid: int) -> int:
        self._check(vid)
        return len(self._adj[vid])

    def neighbors(self, vid: int):
        self._check(vid)
        return self._nbrs[vid].keys()

    @property
    def num_vertices(self) -> int:
        return len(self.labels)

    @property
    def num_edges(self) -> int:
        return self._active

    # -- edges ------------------------------------------------------------

    def insert_edge(self, src: int, dst: int, ts: int, label: str | None = None) -> Edge:
        """Append an edge at the tail of both endpoints' adjacency lists."""
        self._check(src)
        self._check(dst)
        if ts < 0:
            raise GraphError(f"negative timestamp {ts}")
        for v in (src, dst):
            adj = self._adj[v]
            if adj and adj[-1].ts > ts:
                raise TimestampRegression(
                    f"edge ({src}, {dst}, {ts}) arrives after ts {adj[-1].ts} at vertex {v}"
                )
        edge = Edge(src, dst, ts, label, self._next_seq)
        self._next_seq += 1
        self._adj[src].append(edge)
        if dst != src:
            self._adj[dst].append(edge)
        self._nbrs[src].setdefault(dst, deque()).append(edge)
        if dst != src:
            self._nbrs[dst].setdefault(src, deque()).append(edge)
        self._active += 1
        return edge

    def delete_expired(self, edge: Edge) -> None:
        """Remove ``edge`` from the head of its endpoints' adjacency lists."""
        src, dst = edge.src, edge.dst
        for v in (src, dst):
            adj = self._adj.get(v)
            if not adj or adj[0] is not edge:
                raise GraphError(f"{edge!r} is not at the head of vertex {v}'s adjacency")
        self._adj[src].popleft()
        if dst != src:
            self._adj[dst].popleft()
        for a, b in ((src, dst), (dst, src)):
            par = self._nbrs[a][b]
            if par[0] is edge:
                par.popleft()
            if not par:
                del self._nbrs[a][b]
            if a == b:
                break
        self._active -= 1

    def edges_between(
        self,
        u: int,
        v: int,
        elabel=_ANY,
        min_ts_exclusive: int | None = None,
        max_ts_exclusive: int | None = None,
    ) -> list[Edge]:
        """Active parallel edges between ``u`` and ``v`` in ascending timestamp order."""
        self._check(u)
        self._check(v)
        par = self._nbrs[u].get(v)
        if not par:
            return []
        out = []
        for e in par:
            if self.directed and e.src != u:
                continue
            if elabel is not _ANY and e.label != elabel:
                continue
            if min_ts_exclusive is not None and e.ts <= min_ts_exclusive:
                continue
            if max_ts_exclusive is not None and e.ts >= max_ts_exclusive:
                continue
            out.append(e)
        return out

    def incident_edges(self, v: int) -> Iterator[tuple[Edge, int]]:
        self._check(v)
        for e in self._adj[v]:
            yield e, e.other(v)

    def edges(self) -> list[Edge]:
        """All active edges ordered by arrival."""
        seen = {}
        for adj in self._adj.values():
            for e in adj:
                seen[e.seq] = e
        return [seen[k] for k in sorted(seen)]

    def freeze(self) -> Snapshot:
        return Snapshot(
            tuple(sorted(self.labels.items())),
            tuple(e.as_tuple() for e in self.edges()),
        )

    def oldest_edge(self) -> Edge | None:
        best = None
        for adj in self._adj.values():
            if adj and (best is None or adj[0].seq < best.seq):
                best = adj[0]
        return best

    def _check(self, vid: int) -> None:
        if vid not in self.labels:
            raise GraphError(f"unknown vertex {vid}")
