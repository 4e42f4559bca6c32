"""Max-min timestamp tables and the bidirectional candidate index.

For a query vertex ``u`` mapped to data vertex ``v``, and an edge ``e`` above
``u``, the table holds the largest value, over all weak embeddings of the
sub-DAG under ``u`` anchored at ``v``, of the smallest timestamp among the
mapped edges that must come after ``e``. A second channel tracks the edges
that must come before ``e``; it stores negated timestamps so the same
max/min recurrence applies. An edge ``e=(p, c)`` can carry a data edge with
timestamp ``t`` only if ``t`` is below the first channel and ``-t`` is below
the second, read at ``c``'s image.

Storage is sparse: ``entries[u][v]`` exists exactly when a weak embedding of
the sub-DAG exists there, and holds one value per channel of ``u``. Leaves
store nothing; a label match is enough for them.
"""

from __future__ import annotations

import heapq
import math
from typing import Iterable, Iterator

from .dag import QueryDag
from .graph import Edge, TemporalGraph
from .query import TemporalQuery

__all__ = [
    "INF",
    "NEG_INF",
    "LATER",
    "EARLIER",
    "MaxMinTable",
    "CandidateIndex",
    "candidate_keys",
    "format_ext",
]

INF = math.inf
NEG_INF = -math.inf
LATER = 1
EARLIER = -1

_NO_TS, _LATEST, _EARLIEST = 0, 1, 2


def format_ext(x) -> str:
    if x == INF:
        return "+inf"
    if x == NEG_INF:
        return "-inf"
    return str(int(x))


def candidate_keys(q: TemporalQuery, labels: dict, edge: Edge, directed: bool) -> Iterator[tuple]:
    """Yield ``(eid, img_src, img_dst)`` for every way a query edge can map onto ``edge``."""
    a, b = edge.src, edge.dst
    if a == b:
        return
    la, lb = labels[a], labels[b]
    for eid in q.edge_ids:
        qe = q.edges[eid]
        if qe.label != edge.label:
            continue
        ls, ld = q.labels[qe.src], q.labels[qe.dst]
        if ls == la and ld == lb:
            yield eid, a, b
        if not directed and ls == lb and ld == la:
            yield eid, b, a


class _ChildPlan:
    __slots__ = ("child", "eid", "label", "elabel", "parent_is_src", "steps", "leaf")

    def __init__(self, child, eid, label, elabel, parent_is_src, steps, leaf):
        self.child = child
        self.eid = eid
        self.label = label
        self.elabel = elabel
        self.parent_is_src = parent_is_src
        self.steps = steps
        self.leaf = leaf


class MaxMinTable:
    """Incrementally maintained max-min timestamps for one DAG orientation."""

    def __init__(self, graph: TemporalGraph, dag: QueryDag, name: str = "fwd", directed: bool | None = None):
        self.graph = graph
        self.dag = dag
        self.query = q = dag.query
        self.name = name
        self.directed = graph.directed if directed is None else directed
        order = q.order

        sub = {u: dag.sub_edges(u) for u in dag.order}
        upper = {u: dag.upper_edges(u) for u in dag.order}
        self.channels: dict[int, tuple[tuple[int, int], ...]] = {}
        for u in dag.order:
            chans = []
            for e in sorted(upper[u]):
                if any(order.precedes(e, x) for x in sub[u]):
                    chans.append((e, LATER))
                if any(order.precedes(x, e) for x in sub[u]):
                    chans.append((e, EARLIER))
            self.channels[u] = tuple(chans)
        self.slot = {u: {ch: i for i, ch in enumerate(chs)} for u, chs in self.channels.items()}

        self.plans: dict[int, list[_ChildPlan]] = {}
        for u in dag.order:
            plans = []
            for c, eid in dag.children[u]:
                steps = []
                for i, (e, s) in enumerate(self.channels[u]):
                    pos = self.slot[c].get((e, s), -1)
                    if s == LATER and order.precedes(e, eid):
                        mode = _LATEST
                    elif s == EARLIER and order.precedes(eid, e):
                        mode = _EARLIEST
                    else:
                        mode = _NO_TS
                    steps.append((i, pos, mode))
                qe = q.edges[eid]
                plans.append(
                    _ChildPlan(c, eid, q.labels[c], qe.label, qe.src == u, steps, not dag.children[c])
                )
            self.plans[u] = plans
        # lemma-3 slots per query edge, read at the child endpoint
        self.test_slots = {}
        for eid, (p, c) in dag.orientation.items():
            self.test_slots[eid] = (
                self.slot[c].get((eid, LATER), -1),
                self.slot[c].get((eid, EARLIER), -1),
            )
        self.entries: dict[int, dict[int, tuple]] = {u: {} for u in dag.order if dag.children[u]}
        # keys (eid, seq, img_src) that pass the membership test in this orientation
        self.matchable: set[tuple[int, int, int]] = set()

    # -- reads ------------------------------------------------------------

    def has_weak(self, u: int, v: int) -> bool:
        if self.graph.labels.get(v) != self.query.labels[u]:
            return False
        ent = self.entries.get(u)
        return ent is None or v in ent

    def value(self, u: int, v: int, e: int, sign: int = LATER):
        """Channel value at ``(u, v)``; reads as ±inf where nothing is stored."""
        if not self.has_weak(u, v):
            return NEG_INF
        i = self.slot[u].get((e, sign))
        if i is None:
            return INF
        return self.entries[u][v][i]

    def edge_value(self, eid: int, edge: Edge, child_img: int, e: int, sign: int = LATER):
        """Value of channel ``(e, sign)`` for the sub-DAG below ``eid`` carried by ``edge``."""
        c = self.dag.orientation[eid][1]
        x = self.value(c, child_img, e, sign)
        if x == NEG_INF:
            return NEG_INF
        order = self.query.order
        if sign == LATER and order.precedes(e, eid):
            x = min(x, edge.ts)
        elif sign == EARLIER and order.precedes(eid, e):
            x = min(x, -edge.ts)
        return x

    def set_value(self, u: int, v: int, e: int, value, sign: int = LATER) -> None:
        """Overwrite one stored channel. Meant for fixtures, not for maintenance."""
        i = self.slot[u][(e, sign)]
        row = list(self.entries[u].get(v) or [INF] * len(self.channels[u]))
        row[i] = value
        self.entries[u][v] = tuple(row)

    def bounds(self, eid: int, child_img: int):
        """Open interval ``(lo, hi)`` of timestamps that ``eid`` can carry, or None."""
        c = self.dag.orientation[eid][1]
        ent = self.entries.get(c)
        if ent is None:
            return NEG_INF, INF
        row = ent.get(child_img)
        if row is None:
            return None
        ip, im = self.test_slots[eid]
        hi = row[ip] if ip >= 0 else INF
        lo = -row[im] if im >= 0 else NEG_INF
        return lo, hi

    def is_tc_matchable(self, eid: int, edge: Edge, child_img: int | None = None) -> bool:
        """Membership test for ``eid`` carrying ``edge`` with ``child_img`` under its child end."""
        if child_img is None:
            child_img = self._child_image(eid, edge)
        if not self.has_weak(self.dag.orientation[eid][1], child_img):
            return False
        b = self.bounds(eid, child_img)
        return b is not None and b[0] < edge.ts < b[1]

    def _child_image(self, eid: int, edge: Edge) -> int:
        p, c = self.dag.orientation[eid]
        qe = self.query.edges[eid]
        # default anchoring: query src onto data src
        return edge.dst if qe.src == p else edge.src

    # -- recurrence -------------------------------------------------------

    def recompute_entry(self, u: int, v: int, exclude: Edge | None = None):
        """Evaluate the recurrence at ``(u, v)``; ``None`` when no weak embedding exists."""
        g = self.graph
        labels = g.labels
        if labels.get(v) != self.query.labels[u]:
            return None
        nbrs = g._nbrs[v]
        k = len(self.channels[u])
        vals = [INF] * k
        directed = self.directed
        for plan in self.plans[u]:
            clabel = plan.label
            centries = None if plan.leaf else self.entries[plan.child]
            steps = plan.steps
            best = [NEG_INF] * k
            found = False
            for w, par in nbrs.items():
                if w == v or labels[w] != clabel:
                    continue
                if centries is None:
                    row = ()
                else:
                    row = centries.get(w)
                    if row is None:
                        continue
                first = last = None
                src_needed = v if plan.parent_is_src else w
                for e in par:
                    if e is exclude or e.label != plan.elabel:
                        continue
                    if directed and e.src != src_needed:
                        continue
                    if first is None:
                        first = e.ts
                    last = e.ts
                if first is None:
                    continue
                found = True
                if not k:
                    break
                for i, pos, mode in steps:
                    x = row[pos] if pos >= 0 else INF
                    if mode == _LATEST:
                        if last < x:
                            x = last
                    elif mode == _EARLIEST:
                        if -first < x:
                            x = -first
                    if x > best[i]:
                        best[i] = x
            if not found:
                return None
            for i in range(k):
                if best[i] < vals[i]:
                    vals[i] = best[i]
        return tuple(vals)

    # -- maintenance ------------------------------------------------------

    def _anchorings(self, edge: Edge):
        """Yield ``(eid, parent_img, child_img, img_src)`` for edges matching ``edge``."""
        orient = self.dag.orientation
        for eid, a, b in candidate_keys(self.query, self.graph.labels, edge, self.directed):
            p, c = orient[eid]
            if self.query.edges[eid].src == p:
                yield eid, a, b, a
            else:
                yield eid, b, a, a

    def _pass(self, eid: int, c: int, row, ts) -> bool:
        if row is None:
            return False
        ip, im = self.test_slots[eid]
        if ip >= 0 and not ts < row[ip]:
            return False
        if im >= 0 and not -ts < row[im]:
            return False
        return True

    def _child_row(self, c: int, y: int):
        ent = self.entries.get(c)
        if ent is None:
            return () if self.graph.labels.get(y) == self.query.labels[c] else None
        return ent.get(y)

    def tcm_insertion(self, edge: Edge) -> set[tuple[int, int, int]]:
        """Update after ``edge`` was added to the graph; return newly matchable keys."""
        return self._update(edge, inserting=True)

    def tcm_deletion(self, edge: Edge) -> set[tuple[int, int, int]]:
        """Update as if ``edge`` (still in the graph) were gone; return keys no longer matchable."""
        return self._update(edge, inserting=False)

    def _update(self, edge: Edge, inserting: bool) -> set:
        delta: set = set()
        exclude = None if inserting else edge
        heap: list = []
        scheduled: set = set()
        topo = self.dag.topo_index
        for eid, x, y, img_src in self._anchorings(edge):
            p, c = self.dag.orientation[eid]
            key = (eid, edge.seq, img_src)
            if inserting:
                if self._pass(eid, c, self._child_row(c, y), edge.ts):
                    self.matchable.add(key)
                    delta.add(key)
            elif key in self.matchable:
                self.matchable.discard(key)
                delta.add(key)
            if (p, x) not in scheduled:
                scheduled.add((p, x))
                heapq.heappush(heap, (-topo[p], p, x))
        self._propagate(heap, scheduled, exclude, delta, inserting)
        return delta

    def _propagate(self, heap, scheduled, exclude, delta, inserting) -> None:
        g = self.graph
        labels = g.labels
        qlabels = self.query.labels
        topo = self.dag.topo_index
        directed = self.directed
        while heap:
            _, u, v = heapq.heappop(heap)
            new = self.recompute_entry(u, v, exclude)
            table = self.entries[u]
            old = table.get(v)
            if new == old:
                continue
            if new is None:
                del table[v]
            else:
                table[v] = new
            for p, eid in self.dag.parents[u]:
                ip, im = self.test_slots[eid]
                old_lo = (NEG_INF if im < 0 else -old[im]) if old is not None else None
                old_hi = (INF if ip < 0 else old[ip]) if old is not None else None
                new_lo = (NEG_INF if im < 0 else -new[im]) if new is not None else None
                new_hi = (INF if ip < 0 else new[ip]) if new is not None else None
                retest = (old_lo, old_hi) != (new_lo, new_hi)
                qe = self.query.edges[eid]
                p_is_src = qe.src == p
                plabel = qlabels[p]
                for w, par in g._nbrs[v].items():
                    if w == v or labels[w] != plabel:
                        continue
                    src_needed = w if p_is_src else v
                    hit = False
                    for e in par:
                        if e is exclude or e.label != qe.label:
                            continue
                        if directed and e.src != src_needed:
                            continue
                        hit = True
                        if not retest:
                            break
                        t = e.ts
                        was = old_lo is not None and old_lo < t < old_hi
                        now = new_lo is not None and new_lo < t < new_hi
                        if was != now:
                            key = (eid, e.seq, src_needed)
                            if now:
                                self.matchable.add(key)
                            else:
                                self.matchable.discard(key)
                            delta.add(key)
                    if hit and (p, w) not in scheduled:
                        scheduled.add((p, w))
                        heapq.heappush(heap, (-topo[p], p, w))

    # -- inspection -------------------------------------------------------

    def rebuild(self) -> None:
        """Recompute every entry and the matchable set from scratch."""
        self.entries = {u: {} for u in self.entries}
        for u in reversed(self.dag.order):
            if u not in self.entries:
                continue
            for v, lab in self.graph.labels.items():
                if lab != self.query.labels[u]:
                    continue
                row = self.recompute_entry(u, v)
                if row is not None:
                    self.entries[u][v] = row
        self.matchable = set()
        for e in self.graph.edges():
            for eid, x, y, img_src in self._anchorings(e):
                c = self.dag.orientation[eid][1]
                if self._pass(eid, c, self._child_row(c, y), e.ts):
                    self.matchable.add((eid, e.seq, img_src))

    def stored_count(self) -> int:
        return sum(len(ent) for ent in self.entries.values())

    def dump(self) -> list[str]:
        """One line per stored value: ``T <orient> <u> <v> <e> <value>``.

        Channels for earlier edges are written as ``<e>r`` with the plain
        (un-negated) timestamp bound.
        """
        lines = []
        for u in self.dag.order:
            ent = self.entries.get(u)
            if not ent:
                continue
            for v in sorted(ent):
                row = ent[v]
                for (e, s), x in zip(self.channels[u], row):
                    if s == LATER:
                        lines.append(f"T {self.name} {u} {v} {e} {format_ext(x)}")
                    else:
                        lines.append(f"T {self.name} {u} {v} {e}r {format_ext(-x)}")
        return lines


class CandidateIndex:
    """Keys matchable in both orientations, plus per-vertex weak-embedding flags."""

    def __init__(self, forward: MaxMinTable, backward: MaxMinTable):
        self.forward = forward
        self.backward = backward
        self.pairs: set[tuple[int, int, int]] = set()
        self.peak = 0

    def __contains__(self, key) -> bool:
        return key in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def contains(self, eid: int, edge: Edge, img_src: int) -> bool:
        return (eid, edge.seq, img_src) in self.pairs

    def vertex_ok(self, u: int, v: int) -> bool:
        return self.forward.has_weak(u, v) and self.backward.has_weak(u, v)

    def apply_delta(self, forward_delta: Iterable, reverse_delta: Iterable, sign: int) -> set:
        """Bring membership in line with both tables; return keys whose membership flipped."""
        fm, bm = self.forward.matchable, self.backward.matchable
        flipped = set()
        for key in set(forward_delta) | set(reverse_delta):
            want = key in fm and key in bm
            have = key in self.pairs
            if want == have:
                continue
            if want and sign < 0:
                raise AssertionError(f"deletion made {key} matchable")
            if want:
                self.pairs.add(key)
            else:
                self.pairs.discard(key)
            flipped.add(key)
        if len(self.pairs) > self.peak:
            self.peak = len(self.pairs)
        return flipped

    def rebuild(self) -> None:
        self.pairs = self.forward.matchable & self.backward.matchable
        self.peak = max(self.peak, len(self.pairs))
