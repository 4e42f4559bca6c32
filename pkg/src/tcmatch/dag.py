"""Rooted acyclic orientations of a query graph.

The greedy builder places one vertex at a time and orients every edge from
the already-placed endpoint to the new one. A candidate's score is the
number of (ancestor edge, descendant edge) pairs that are temporally related
and first become ancestor-descendant when the candidate is placed.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .query import QueryError, TemporalQuery

__all__ = ["QueryDag", "build_dag", "best_dag", "reverse", "temporal_ancestor_pairs"]


def _descendant_masks(q: TemporalQuery, orient: Mapping[int, tuple[int, int]]) -> dict[int, int]:
    """For each oriented edge, the bitmask of edges reachable below it."""
    pos = q.order.pos
    out_edges: dict[int, list[int]] = {}
    for eid, (p, c) in orient.items():
        out_edges.setdefault(p, []).append(eid)
    below_vertex: dict[int, int] = {}

    def below(u: int) -> int:
        if u in below_vertex:
            return below_vertex[u]
        below_vertex[u] = 0  # guards against cycles in malformed input
        mask = 0
        for eid in out_edges.get(u, ()):
            mask |= 1 << pos[eid]
            mask |= below(orient[eid][1])
        below_vertex[u] = mask
        return mask

    return {eid: below(c) for eid, (p, c) in orient.items()}


def _pair_count(q: TemporalQuery, orient: Mapping[int, tuple[int, int]]) -> int:
    order = q.order
    total = 0
    for eid, mask in _descendant_masks(q, orient).items():
        related = order.later_mask(eid) | order.earlier_mask(eid)
        total += bin(mask & related).count("1")
    return total


class QueryDag:
    """An orientation of every query edge, parent to child.

    ``roots`` lists the vertices without incoming edges. ``root`` is the
    single root, or ``None`` when there are several; a reversed DAG usually
    has several and they hang under an implicit super-root.
    """

    def __init__(
        self,
        q: TemporalQuery,
        orientation: Mapping[int, tuple[int, int]],
        order: Iterable[int],
        score: int | None = None,
    ):
        self.query = q
        self.orientation = dict(orientation)
        self.order = tuple(order)
        if set(self.orientation) != set(q.edges):
            raise QueryError("orientation must cover every query edge exactly once")
        for eid, (p, c) in self.orientation.items():
            e = q.edges[eid]
            if {p, c} != {e.src, e.dst}:
                raise QueryError(f"edge {eid} oriented between the wrong endpoints")
        self.topo_index = {u: i for i, u in enumerate(self.order)}
        if len(self.topo_index) != q.num_vertices:
            raise QueryError("vertex order must list every query vertex once")
        for eid, (p, c) in self.orientation.items():
            if self.topo_index[p] >= self.topo_index[c]:
                raise QueryError(f"edge {eid} points against the vertex order")
        self.children: dict[int, list[tuple[int, int]]] = {u: [] for u in self.order}
        self.parents: dict[int, list[tuple[int, int]]] = {u: [] for u in self.order}
        for eid in sorted(self.orientation):
            p, c = self.orientation[eid]
            self.children[p].append((c, eid))
            self.parents[c].append((p, eid))
        self.roots = tuple(u for u in self.order if not self.parents[u])
        self.root = self.roots[0] if len(self.roots) == 1 else None
        self.ta_pairs = temporal_ancestor_pairs(self)
        self.score = len(self.ta_pairs) if score is None else score
        # filled by build_dag for inspection
        self.placement_scores: list[tuple[int, int]] = []
        self.score_history: list[dict[int, int]] = []

    def parent_of(self, eid: int) -> int:
        return self.orientation[eid][0]

    def child_of(self, eid: int) -> int:
        return self.orientation[eid][1]

    def sub_edges(self, u: int) -> set[int]:
        """Edge ids on all paths starting at ``u``."""
        out: set[int] = set()
        stack = [u]
        seen = {u}
        while stack:
            x = stack.pop()
            for c, eid in self.children[x]:
                out.add(eid)
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return out

    def upper_edges(self, u: int) -> set[int]:
        """Edge ids on all paths ending at ``u``."""
        out: set[int] = set()
        stack = [u]
        seen = {u}
        while stack:
            x = stack.pop()
            for p, eid in self.parents[x]:
                out.add(eid)
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return out

    def is_ancestor_edge(self, a: int, b: int) -> bool:
        return b in self.sub_edges(self.child_of(a))

    def __repr__(self) -> str:
        edges = ", ".join(f"{eid}:{p}->{c}" for eid, (p, c) in sorted(self.orientation.items()))
        return f"QueryDag(root={self.root}, score={self.score}, [{edges}])"


def temporal_ancestor_pairs(dag: QueryDag) -> frozenset[tuple[int, int]]:
    q = dag.query
    ids = q.order.edge_ids
    out = set()
    for eid, mask in _descendant_masks(q, dag.orientation).items():
        related = q.order.later_mask(eid) | q.order.earlier_mask(eid)
        hit = mask & related
        j = 0
        while hit:
            if hit & 1:
                out.add((eid, ids[j]))
            hit >>= 1
            j += 1
    return frozenset(out)


def build_dag(q: TemporalQuery, r: int) -> tuple[QueryDag, int]:
    """Greedy DAG rooted at ``r``; returns the DAG and its score."""
    if r not in q.labels:
        raise QueryError(f"unknown root vertex {r}")
    placed: list[int] = []
    placed_set: set[int] = set()
    orient: dict[int, tuple[int, int]] = {}
    cand: list[int] = []  # insertion order doubles as the tie-break
    history: list[dict[int, int]] = []
    placements: list[tuple[int, int]] = []
    current = 0

    def provisional(extra: int | None) -> dict[int, tuple[int, int]]:
        # edges leaving placed vertices (and ``extra``) point outward
        group = placed_set if extra is None else placed_set | {extra}
        prov = {}
        for eid, e in q.edges.items():
            if eid in orient:
                prov[eid] = orient[eid]
            elif e.src in group and e.dst in group:
                prov[eid] = (e.other(extra), extra)
            elif e.src in group:
                prov[eid] = (e.src, e.dst)
            elif e.dst in group:
                prov[eid] = (e.dst, e.src)
        return prov

    def place(u: int, score: int) -> None:
        nonlocal current
        for e in q.incident(u):
            if e.other(u) in placed_set:
                orient[e.id] = (e.other(u), u)
        placed.append(u)
        placed_set.add(u)
        current += score
        placements.append((u, score))
        for e in q.incident(u):
            w = e.other(u)
            if w not in placed_set and w not in cand:
                cand.append(w)

    place(r, _pair_count(q, provisional(None)))
    while cand:
        base = _pair_count(q, provisional(None))
        scores = {u: _pair_count(q, provisional(u)) - base for u in cand}
        history.append(dict(scores))
        best = max(cand, key=lambda u: scores[u])  # max keeps the first maximum
        cand.remove(best)
        place(best, scores[best])
    if len(placed) != q.num_vertices:
        raise QueryError("query graph is not connected")
    dag = QueryDag(q, orient, placed, current)
    dag.placement_scores = placements
    dag.score_history = history
    if dag.score != len(dag.ta_pairs):
        raise AssertionError("incremental score disagrees with the pair count")
    return dag, current


def best_dag(q: TemporalQuery) -> QueryDag:
    best = None
    for r in q.vertex_ids:
        dag, score = build_dag(q, r)
        if best is None or score > best.score:
            best = dag
    return best


def reverse(dag: QueryDag) -> QueryDag:
    flipped = {eid: (c, p) for eid, (p, c) in dag.orientation.items()}
    return QueryDag(dag.query, flipped, reversed(dag.order))
