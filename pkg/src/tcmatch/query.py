"""Temporal query graphs: labeled vertices, edges and a strict partial order.

The order is stored as its transitive closure, one bitmask row per edge, so
every relation check is a shift and a mask.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, NamedTuple

__all__ = [
    "QueryError",
    "QueryVertex",
    "QueryEdge",
    "TemporalOrder",
    "TemporalQuery",
    "build_order",
    "validate_query",
]


class QueryError(ValueError):
    """Invalid query or temporal order. ``errors`` lists every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class QueryVertex(NamedTuple):
    id: int
    label: str


class QueryEdge(NamedTuple):
    id: int
    src: int
    dst: int
    label: str | None = None

    def other(self, u: int) -> int:
        return self.dst if u == self.src else self.src


class TemporalOrder:
    """Transitively closed strict partial order over a fixed set of edge ids."""

    def __init__(self, edge_ids: Iterable[int], direct_pairs: Iterable[tuple[int, int]] = ()):
        self.edge_ids = tuple(sorted(edge_ids))
        self.pos = {e: i for i, e in enumerate(self.edge_ids)}
        self.direct_pairs = tuple(direct_pairs)
        n = len(self.edge_ids)
        after = [0] * n
        bad = [
            f"order pair ({a}, {b}) references unknown edge id"
            for a, b in self.direct_pairs
            if a not in self.pos or b not in self.pos
        ]
        if bad:
            raise QueryError(bad)
        for a, b in self.direct_pairs:
            after[self.pos[a]] |= 1 << self.pos[b]
        # Warshall over bit rows
        for k in range(n):
            bit = 1 << k
            row_k = after[k]
            for i in range(n):
                if after[i] & bit:
                    after[i] |= row_k
        for i in range(n):
            if after[i] >> i & 1:
                raise QueryError(f"temporal order has a cycle through edge {self.edge_ids[i]}")
        self._after = after
        before = [0] * n
        for i in range(n):
            row = after[i]
            for j in range(n):
                if row >> j & 1:
                    before[j] |= 1 << i
        self._before = before

    def precedes(self, a: int, b: int) -> bool:
        return bool(self._after[self.pos[a]] >> self.pos[b] & 1)

    def related(self, a: int, b: int) -> bool:
        return self.precedes(a, b) or self.precedes(b, a)

    def later_mask(self, e: int) -> int:
        """Bitmask (by position) of edges that must come after ``e``."""
        return self._after[self.pos[e]]

    def earlier_mask(self, e: int) -> int:
        return self._before[self.pos[e]]

    def pairs(self) -> list[tuple[int, int]]:
        """All closure pairs ``(a, b)`` with ``a`` before ``b``."""
        ids = self.edge_ids
        return [
            (ids[i], ids[j])
            for i in range(len(ids))
            for j in range(len(ids))
            if self._after[i] >> j & 1
        ]

    def related_count(self) -> int:
        return sum(bin(row).count("1") for row in self._after)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalOrder):
            return NotImplemented
        return self.edge_ids == other.edge_ids and self._after == other._after

    def __hash__(self) -> int:
        return hash((self.edge_ids, tuple(self._after)))

    def __repr__(self) -> str:
        return f"TemporalOrder({self.pairs()})"


def build_order(edge_ids: Iterable[int], direct_pairs: Iterable[tuple[int, int]]) -> TemporalOrder:
    return TemporalOrder(edge_ids, direct_pairs)


class TemporalQuery:
    """A query graph together with its temporal order.

    ``vertices`` maps id to label (or is an iterable of ``(id, label)``);
    ``edges`` holds :class:`QueryEdge` values or ``(id, src, dst[, label])``
    tuples; ``order`` holds direct ``(before, after)`` pairs.
    """

    def __init__(self, vertices, edges, order: Iterable[tuple[int, int]] = ()):
        if isinstance(vertices, dict):
            vitems = list(vertices.items())
        else:
            vitems = [tuple(v) for v in vertices]
        errors = []
        self.labels: dict[int, str] = {}
        for vid, lab in vitems:
            if vid in self.labels:
                errors.append(f"duplicate query vertex id {vid}")
            self.labels[vid] = lab
        self.edges: dict[int, QueryEdge] = {}
        for raw in edges:
            e = raw if isinstance(raw, QueryEdge) else QueryEdge(*raw)
            if e.id in self.edges:
                errors.append(f"duplicate query edge id {e.id}")
            if e.src not in self.labels or e.dst not in self.labels:
                errors.append(f"edge {e.id} references an unknown vertex")
            if e.src == e.dst:
                errors.append(f"edge {e.id} is a self-loop")
            self.edges[e.id] = e
        if errors:
            raise QueryError(errors)
        self.order = TemporalOrder(self.edges, order)
        self.edge_ids = self.order.edge_ids
        self.vertex_ids = tuple(sorted(self.labels))
        self._incident: dict[int, list[QueryEdge]] = {u: [] for u in self.labels}
        for eid in self.edge_ids:
            e = self.edges[eid]
            self._incident[e.src].append(e)
            self._incident[e.dst].append(e)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_vertices(self) -> int:
        return len(self.labels)

    def precedes(self, a: int, b: int) -> bool:
        return self.order.precedes(a, b)

    def temporally_related(self, a: int, b: int) -> bool:
        return self.order.related(a, b)

    def incident(self, u: int) -> list[QueryEdge]:
        """Edges at ``u`` in ascending id order."""
        return self._incident[u]

    def neighbors(self, u: int) -> list[int]:
        seen = []
        for e in self._incident[u]:
            w = e.other(u)
            if w not in seen:
                seen.append(w)
        return seen

    def edges_between(self, u: int, w: int) -> list[QueryEdge]:
        return [e for e in self._incident[u] if e.other(u) == w]

    def density(self) -> Fraction:
        m = len(self.edges)
        if m < 2:
            raise QueryError("density needs at least two query edges")
        return Fraction(self.order.related_count(), m * (m - 1) // 2)

    def with_order(self, pairs: Iterable[tuple[int, int]]) -> TemporalQuery:
        return TemporalQuery(dict(self.labels), list(self.edges.values()), pairs)

    def is_connected(self) -> bool:
        if not self.labels:
            return True
        start = self.vertex_ids[0]
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.labels)

    def __repr__(self) -> str:
        return (
            f"TemporalQuery(|V|={self.num_vertices}, |E|={self.num_edges}, "
            f"order={self.order.pairs()})"
        )


def validate_query(q: TemporalQuery) -> list[str]:
    """Return every problem that keeps ``q`` from being matched; empty when fine."""
    errors = []
    if not q.edges:
        errors.append("query has no edges")
    if not q.is_connected():
        errors.append("query graph is not connected")
    return errors
