"""Backtracking search for time-constrained embeddings through one data edge.

The search alternates between two kinds of nodes. When some unmapped query
edge has both endpoints mapped it is extended next, over its candidate data
edges; otherwise the frontier vertex with the fewest candidates is mapped.

Three prunings apply at edge nodes, keyed on the unmapped query edges that
are temporally related to the edge being extended (``R-``):

* ``R-`` empty: every candidate leads to the same subtree, so only the first
  is explored and the rest are substituted into each embedding it yields.
* ``R-`` all on one side: candidates are tried in the favourable timestamp
  direction, and once one fails the rest would fail too.
* otherwise: failing sets. A failed child whose failing set omits the edge
  being extended fails for reasons its siblings share, so they are skipped.

Failing sets are bitmasks over query-edge positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .graph import Edge, TemporalGraph
from .maxmin import CandidateIndex, candidate_keys
from .oracle import embedding_key
from .query import TemporalQuery

__all__ = [
    "MatchOptions",
    "Embedding",
    "PartialEmbedding",
    "Matcher",
    "RSets",
    "compute_R",
    "compute_EC",
    "candidate_vertices",
    "next_extension",
    "combine_failing_sets",
    "find_matches",
]


@dataclass
class MatchOptions:
    limit: int | None = None
    count_only: bool = False
    disable_pruning: bool = False
    disable_filter: bool = False
    trace: Callable | None = None


class Embedding:
    """A complete mapping: query vertex -> data vertex, query edge -> :class:`Edge`."""

    __slots__ = ("vmap", "emap")

    def __init__(self, vmap: dict, emap: dict):
        self.vmap = vmap
        self.emap = emap

    def key(self) -> tuple:
        return embedding_key(self.vmap, {eid: e.seq for eid, e in self.emap.items()})

    def __repr__(self) -> str:
        return f"Embedding({self.vmap}, {self.emap})"


class PartialEmbedding:
    def __init__(self, vmap: dict | None = None, emap: dict | None = None):
        self.vmap: dict[int, int] = dict(vmap or {})
        self.emap: dict[int, Edge] = dict(emap or {})
        self.used_v: set[int] = set(self.vmap.values())
        self.used_e: set[int] = {e.seq for e in self.emap.values()}

    def map_vertex(self, u: int, v: int) -> None:
        self.vmap[u] = v
        self.used_v.add(v)

    def unmap_vertex(self, u: int) -> None:
        self.used_v.discard(self.vmap.pop(u))

    def map_edge(self, eid: int, e: Edge) -> None:
        self.emap[eid] = e
        self.used_e.add(e.seq)

    def unmap_edge(self, eid: int) -> None:
        self.used_e.discard(self.emap.pop(eid).seq)


class RSets:
    __slots__ = ("plus", "minus")

    def __init__(self, plus: frozenset, minus: frozenset):
        self.plus = plus
        self.minus = minus

    def __repr__(self) -> str:
        return f"RSets(plus={sorted(self.plus)}, minus={sorted(self.minus)})"


class _Stop(Exception):
    pass


def compute_R(q: TemporalQuery, M: PartialEmbedding, e: int) -> RSets:
    related = [x for x in q.edge_ids if x != e and q.temporally_related(x, e)]
    return RSets(
        frozenset(x for x in related if x in M.emap),
        frozenset(x for x in related if x not in M.emap),
    )


def combine_failing_sets(children, r_plus: int, full: int) -> int:
    """Failing set of an edge node whose children all failed.

    ``children`` holds ``(edge bit, child failing set)`` pairs; an empty list
    is the no-candidate leaf case. All sets are bitmasks, ``full`` is the
    mask of every query edge.
    """
    acc = 0
    for bit, tf in children:
        if tf & full == full:
            return full
        if not tf & bit:
            return tf | r_plus
        acc |= tf
    return acc | r_plus


class Matcher:
    """Search state bound to one graph, query and candidate index."""

    def __init__(
        self,
        graph: TemporalGraph,
        query: TemporalQuery,
        index: CandidateIndex | None,
        directed: bool | None = None,
        options: MatchOptions | None = None,
    ):
        self.graph = graph
        self.query = q = query
        self.index = index
        self.directed = graph.directed if directed is None else directed
        self.options = options or MatchOptions()
        if index is None:
            self.options.disable_filter = True
        self.visited = 0
        pos = q.order.pos
        self.bit = {eid: 1 << pos[eid] for eid in q.edge_ids}
        self.full = (1 << len(q.edge_ids)) - 1
        self.later = {eid: [x for x in q.edge_ids if q.precedes(eid, x)] for eid in q.edge_ids}
        self.earlier = {eid: [x for x in q.edge_ids if q.precedes(x, eid)] for eid in q.edge_ids}
        self.parallel = {
            eid: [x.id for x in q.edges_between(q.edges[eid].src, q.edges[eid].dst) if x.id != eid]
            for eid in q.edge_ids
        }
        self.qadj = {u: q.neighbors(u) for u in q.vertex_ids}
        self.qpar = {
            (u, w): [(e.id, e.src == u, e.label) for e in q.edges_between(u, w)]
            for u in q.vertex_ids
            for w in self.qadj[u]
        }
        self.M = PartialEmbedding()
        self._frames: list[tuple[int, list[Edge]]] = []
        self._sink = None
        self._emitted = 0

    # -- building blocks --------------------------------------------------

    def _edge_ok(self, eid: int, e: Edge, img_src: int) -> bool:
        if self.options.disable_filter:
            return True
        return (eid, e.seq, img_src) in self.index.pairs

    def compute_EC(self, eid: int) -> list[Edge]:
        M = self.M
        qe = self.query.edges[eid]
        x, y = M.vmap[qe.src], M.vmap[qe.dst]
        par = self.graph._nbrs[x].get(y)
        if not par:
            return []
        emap = M.emap
        lo = hi = None
        for a in self.earlier[eid]:
            if a in emap and (lo is None or emap[a].ts > lo):
                lo = emap[a].ts
        for b in self.later[eid]:
            if b in emap and (hi is None or emap[b].ts < hi):
                hi = emap[b].ts
        used = M.used_e
        label = qe.label
        directed = self.directed
        pairs = None if self.options.disable_filter else self.index.pairs
        out = []
        for e in par:
            if lo is not None and e.ts <= lo:
                continue
            if hi is not None and e.ts >= hi:
                break
            if e.label != label or e.seq in used or (directed and e.src != x):
                continue
            if pairs is None or (eid, e.seq, x) in pairs:
                out.append(e)
        return out

    def candidate_vertices(self, u: int) -> list[int]:
        M = self.M
        vmap = M.vmap
        g = self.graph
        mapped = [(w, vmap[w]) for w in self.qadj[u] if w in vmap]
        if not mapped:
            return []
        label = self.query.labels[u]
        filt = not self.options.disable_filter
        pairs = self.index.pairs if filt else None
        directed = self.directed
        glabels = g.labels
        gnbrs = g._nbrs
        used = M.used_v
        if filt:
            fwd, bwd = self.index.forward, self.index.backward
            fent, bent = fwd.entries.get(u), bwd.entries.get(u)
        out = []
        for v in gnbrs[mapped[0][1]]:
            if v in used or glabels[v] != label:
                continue
            if filt and ((fent is not None and v not in fent) or (bent is not None and v not in bent)):
                continue
            nv = gnbrs[v]
            ok = True
            for w, x in mapped:
                par = nv.get(x)
                if not par:
                    ok = False
                    break
                for eid, u_is_src, elabel in self.qpar[(u, w)]:
                    img_src = v if u_is_src else x
                    for e in par:
                        if e.label != elabel or (directed and e.src != img_src):
                            continue
                        if pairs is None or (eid, e.seq, img_src) in pairs:
                            break
                    else:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                out.append(v)
        out.sort()
        return out

    def next_extension(self):
        """``("edge", eid)`` or ``("vertex", u, candidates)``."""
        M = self.M
        q = self.query
        for eid in q.edge_ids:
            if eid in M.emap:
                continue
            qe = q.edges[eid]
            if qe.src in M.vmap and qe.dst in M.vmap:
                return ("edge", eid)
        best = None
        for u in q.vertex_ids:
            if u in M.vmap or not any(w in M.vmap for w in self.qadj[u]):
                continue
            cands = self.candidate_vertices(u)
            if best is None or len(cands) < len(best[2]):
                best = ("vertex", u, cands)
                if not cands:
                    break
        return best

    # -- search -----------------------------------------------------------

    def _emit(self) -> None:
        M = self.M
        opts = self.options
        frames = self._frames
        if opts.count_only:
            n = 1
            for _, alts in frames:
                n *= 1 + len(alts)
            if opts.limit is not None:
                n = min(n, opts.limit - self._emitted)
            self._emitted += n
            if self._sink is not None:
                self._sink(n)
        else:
            base = dict(M.emap)

            def expand(i: int) -> None:
                if i == len(frames):
                    self._emitted += 1
                    self._sink(Embedding(dict(M.vmap), dict(base)))
                    if opts.limit is not None and self._emitted >= opts.limit:
                        raise _Stop
                    return
                eid, alts = frames[i]
                rep = base[eid]
                expand(i + 1)
                for alt in alts:
                    base[eid] = alt
                    if opts.trace:
                        opts.trace("substitute", eid, alt)
                    expand(i + 1)
                base[eid] = rep

            expand(0)
        if opts.limit is not None and self._emitted >= opts.limit:
            raise _Stop

    def _search(self) -> tuple[bool, int]:
        self.visited += 1
        if len(self.M.emap) == len(self.query.edges):
            self._emit()
            return True, 0
        step = self.next_extension()
        if step[0] == "edge":
            return self._extend_edge(step[1])
        return self._extend_vertex(step[1], step[2])

    def _extend_vertex(self, u: int, cands: list[int]) -> tuple[bool, int]:
        if not cands:
            return False, self.full
        M = self.M
        found = False
        tf = 0
        for v in cands:
            M.map_vertex(u, v)
            f, t = self._search()
            M.unmap_vertex(u)
            found |= f
            tf |= t
        return found, tf

    def _extend_edge(self, eid: int) -> tuple[bool, int]:
        M = self.M
        opts = self.options
        trace = opts.trace
        bit = self.bit
        ec = self.compute_EC(eid)
        if trace:
            trace("ec", eid, list(ec))
        r_plus = 0
        r_minus_later = 0
        r_minus_earlier = 0
        for b in self.later[eid]:
            if b in M.emap:
                r_plus |= bit[b]
            else:
                r_minus_later |= bit[b]
        for a in self.earlier[eid]:
            if a in M.emap:
                r_plus |= bit[a]
            else:
                r_minus_earlier |= bit[a]
        open_parallel = [x for x in self.parallel[eid] if x not in M.emap]
        conflict = r_plus
        for x in self.parallel[eid]:
            if x in M.emap:
                conflict |= bit[x]
        if not ec:
            return False, conflict
        r_minus = r_minus_later | r_minus_earlier
        prune = not opts.disable_pruning

        if prune and not r_minus and not open_parallel:
            rep, alts = ec[0], ec[1:]
            if trace:
                trace("representative", eid, rep, list(alts))
            self._frames.append((eid, alts))
            M.map_edge(eid, rep)
            try:
                f, t = self._search()
            finally:
                M.unmap_edge(eid)
                self._frames.pop()
            return f, (0 if f else t | conflict)

        monotone = prune and r_minus and not (r_minus_later and r_minus_earlier)
        if monotone and r_minus_earlier:
            ec.reverse()
        found = False
        tf = 0
        for i, e in enumerate(ec):
            M.map_edge(eid, e)
            f, t = self._search()
            M.unmap_edge(eid)
            if f:
                found = True
                continue
            if prune and r_minus and not t & bit[eid]:
                if trace and i + 1 < len(ec):
                    trace("failing_set_prune", eid, list(ec[i + 1 :]), t)
                return found, t | conflict
            tf |= t
            if monotone and self._safe_trigger(eid, e, open_parallel):
                if trace and i + 1 < len(ec):
                    trace("monotone_skip", eid, list(ec[i + 1 :]))
                break
        return found, tf | conflict

    def _safe_trigger(self, eid: int, e: Edge, open_parallel: list[int]) -> bool:
        """True when no unmapped parallel query edge could take ``e`` instead."""
        if not open_parallel:
            return True
        vmap = self.M.vmap
        q = self.query
        for x in open_parallel:
            qx = q.edges[x]
            img_src = vmap[qx.src]
            if qx.label != e.label:
                continue
            if self.directed and e.src != img_src:
                continue
            if self._edge_ok(x, e, img_src):
                return False
        return True

    def find_matches(self, edge: Edge, sink: Callable) -> int:
        """Call ``sink`` once per embedding that maps some query edge onto ``edge``.

        In count-only mode ``sink`` receives integer batch sizes instead.
        Returns the number of embeddings found.
        """
        self._sink = sink
        self._emitted = 0
        self._frames = []
        M = self.M = PartialEmbedding()
        g = self.graph
        try:
            for eid, a, b in candidate_keys(self.query, g.labels, edge, self.directed):
                if not self._edge_ok(eid, edge, a):
                    continue
                qe = self.query.edges[eid]
                M.map_vertex(qe.src, a)
                M.map_vertex(qe.dst, b)
                M.map_edge(eid, edge)
                try:
                    self._search()
                finally:
                    M.unmap_edge(eid)
                    M.unmap_vertex(qe.dst)
                    M.unmap_vertex(qe.src)
        except _Stop:
            pass
        return self._emitted


# -- functional wrappers ---------------------------------------------------


def _bound(graph, query, index, M, options=None) -> Matcher:
    m = Matcher(graph, query, index, options=options)
    m.M = M if isinstance(M, PartialEmbedding) else PartialEmbedding(*M)
    return m


def compute_EC(graph, index, query, M, eid, options=None) -> list[Edge]:
    return _bound(graph, query, index, M, options).compute_EC(eid)


def candidate_vertices(graph, index, query, M, u, options=None) -> list[int]:
    return _bound(graph, query, index, M, options).candidate_vertices(u)


def next_extension(graph, index, query, M, options=None):
    return _bound(graph, query, index, M, options).next_extension()


def find_matches(graph, index, query, edge, sink, options=None) -> tuple[int, int]:
    """Run one search; returns ``(embeddings found, search nodes visited)``."""
    m = Matcher(graph, query, index, options=options)
    n = m.find_matches(edge, sink)
    return n, m.visited
