"""Brute-force reference answers for static snapshots.

Nothing here touches the engine's tables, index or search. Every function
rebuilds its own adjacency from a :class:`~tcmatch.graph.Snapshot` and
checks the definitions directly, so it can serve as an independent witness
in differential tests.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterable

from .dag import QueryDag
from .graph import Snapshot
from .query import TemporalQuery

__all__ = [
    "embedding_key",
    "enumerate_all",
    "enumerate_tc_weak",
    "maxmin_reference",
    "matchable_reference",
    "weak_embedding_sites",
    "snapshot_diff",
]


def embedding_key(vmap: dict, emap: dict) -> tuple:
    """Canonical form: sorted vertex pairs and sorted ``(query edge, data seq)`` pairs."""
    return (tuple(sorted(vmap.items())), tuple(sorted(emap.items())))


def _edge_lists(snap: Snapshot):
    between = defaultdict(list)
    for rec in snap.edges:
        src, dst = rec[0], rec[1]
        if src == dst:
            continue
        between[(src, dst)].append(rec)
        between[(dst, src)].append(rec)
    return between


def _fits(rec, qedge, img_src, img_dst, directed) -> bool:
    src, dst, label = rec[0], rec[1], rec[2]
    if label != qedge.label:
        return False
    if directed:
        return src == img_src and dst == img_dst
    return {src, dst} == {img_src, img_dst}


def enumerate_all(
    snap: Snapshot, q: TemporalQuery, directed: bool = False, through: int | None = None
) -> set[tuple]:
    """Every time-constrained embedding of ``q`` in ``snap``, as canonical keys.

    With ``through`` set to an edge sequence number, only embeddings that use
    that edge are produced. For a snapshot that differs from another by one
    edge this is exactly the difference of the two full answers.
    """
    labels = dict(snap.labels)
    between = _edge_lists(snap)
    by_label = defaultdict(list)
    for v, lab in sorted(labels.items()):
        by_label[lab].append(v)
    adjacent = defaultdict(set)
    for e in q.edges.values():
        adjacent[e.src].add(e.dst)
        adjacent[e.dst].add(e.src)
    edge_ids = list(q.edge_ids)
    # order pairs checked as soon as both edges are assigned
    at = {eid: i for i, eid in enumerate(edge_ids)}
    checks: list[list[tuple[int, int]]] = [[] for _ in edge_ids]
    for a, b in q.order.pairs():
        checks[max(at[a], at[b])].append((a, b))
    vids = sorted(q.vertex_ids)
    eids = sorted(edge_ids)
    results: set[tuple] = set()

    def vertex_order(start: int) -> list[int]:
        # breadth-first, so each vertex after the first touches an earlier one
        order = [start]
        i = 0
        while i < len(order):
            for w in sorted(adjacent[order[i]]):
                if w not in order:
                    order.append(w)
            i += 1
        order += [u for u in q.vertex_ids if u not in order]
        return order

    def search(order: list[int], vmap: dict, forced: dict) -> None:
        def edge_options() -> list | None:
            out = []
            for eid in edge_ids:
                qe = q.edges[eid]
                x, y = vmap[qe.src], vmap[qe.dst]
                recs = [forced[eid]] if eid in forced else between.get((x, y), ())
                fits = [rec for rec in recs if _fits(rec, qe, x, y, directed)]
                if not fits:
                    return None
                out.append(fits)
            return out

        def assign_edges(i: int, options: list, chosen: dict, used: set) -> None:
            if i == len(edge_ids):
                # same shape as embedding_key, without sorting per result
                results.add(
                    (
                        tuple(zip(vids, [vmap[u] for u in vids])),
                        tuple(zip(eids, [chosen[e][4] for e in eids])),
                    )
                )
                return
            eid = edge_ids[i]
            for rec in options[i]:
                if rec[4] in used:
                    continue
                chosen[eid] = rec
                if all(chosen[a][3] < chosen[b][3] for a, b in checks[i]):
                    used.add(rec[4])
                    assign_edges(i + 1, options, chosen, used)
                    used.discard(rec[4])
                del chosen[eid]

        def assign_vertex(i: int) -> None:
            if i == len(order):
                options = edge_options()
                if options is not None:
                    assign_edges(0, options, {}, set())
                return
            u = order[i]
            if u in vmap:
                assign_vertex(i + 1)
                return
            taken = set(vmap.values())
            for v in by_label.get(q.labels[u], ()):
                if v in taken:
                    continue
                if any(w in vmap and (v, vmap[w]) not in between for w in adjacent[u]):
                    continue
                vmap[u] = v
                assign_vertex(i + 1)
                del vmap[u]

        assign_vertex(0)

    if through is None:
        if q.vertex_ids:
            search(vertex_order(q.vertex_ids[0]), {}, {})
        return results
    recs = [rec for rec in snap.edges if rec[4] == through]
    if not recs or recs[0][0] == recs[0][1]:
        return results
    rec = recs[0]
    for eid in edge_ids:
        qe = q.edges[eid]
        for x, y in ((rec[0], rec[1]), (rec[1], rec[0])):
            if labels[x] != q.labels[qe.src] or labels[y] != q.labels[qe.dst]:
                continue
            if not _fits(rec, qe, x, y, directed):
                continue
            search(vertex_order(qe.src), {qe.src: x, qe.dst: y}, {eid: rec})
    return results


def enumerate_tc_weak(
    snap: Snapshot,
    dag: QueryDag,
    eid: int,
    edge,
    img_src: int | None = None,
    mode: str = "joint",
    directed: bool = False,
) -> bool:
    """Whether a timestamp-respecting homomorphism of the path tree below ``eid`` exists.

    ``edge`` is a ``(src, dst, label, ts, seq)`` record; ``img_src`` picks the
    data vertex for the query edge's source endpoint. ``mode`` selects which
    descendants are checked: ``"later"`` for those that must follow ``eid``,
    ``"earlier"`` for those that must precede it, ``"joint"`` for both.
    """
    if mode not in ("later", "earlier", "joint"):
        raise ValueError(f"unknown mode {mode!r}")
    q = dag.query
    labels = dict(snap.labels)
    between = _edge_lists(snap)
    src, dst, label, t = edge[0], edge[1], edge[2], edge[3]
    qe = q.edges[eid]
    if img_src is None:
        img_src = src
    img_dst = dst if img_src == src else src
    if not _fits(edge, qe, img_src, img_dst, directed):
        return False
    if labels.get(img_src) != q.labels[qe.src] or labels.get(img_dst) != q.labels[qe.dst]:
        return False
    p, c = dag.orientation[eid]
    child_img = img_dst if c == qe.dst else img_src

    def allowed(other_eid: int, ts) -> bool:
        if mode in ("later", "joint") and q.precedes(eid, other_eid) and not t < ts:
            return False
        if mode in ("earlier", "joint") and q.precedes(other_eid, eid) and not ts < t:
            return False
        return True

    memo: dict = {}

    def exists(u: int, v: int) -> bool:
        if (u, v) in memo:
            return memo[(u, v)]
        ok = True
        for c2, e2 in dag.children[u]:
            qe2 = q.edges[e2]
            hit = False
            for (a, w), recs in between.items():
                if a != v or w == v or labels[w] != q.labels[c2]:
                    continue
                s_img, d_img = (v, w) if qe2.src == u else (w, v)
                for rec in recs:
                    if _fits(rec, qe2, s_img, d_img, directed) and allowed(e2, rec[3]):
                        if exists(c2, w):
                            hit = True
                            break
                if hit:
                    break
            if not hit:
                ok = False
                break
        memo[(u, v)] = ok
        return ok

    return exists(c, child_img)


def _channels_for(dag: QueryDag, u: int) -> list[tuple[int, int]]:
    return [(e, s) for e in sorted(dag.upper_edges(u)) for s in (1, -1)]


def maxmin_reference(snap: Snapshot, dag: QueryDag, directed: bool = False) -> dict:
    """Recompute every channel value bottom-up, looking at each parallel edge separately.

    Returns ``{(u, v, e, sign): value}`` for every non-leaf query vertex ``u``,
    every data vertex ``v`` carrying ``u``'s label, every edge ``e`` on a path
    into ``u``, and both signs. Values use negated timestamps for sign -1 and
    read ``-inf`` where no weak embedding exists.
    """
    q = dag.query
    labels = dict(snap.labels)
    between = _edge_lists(snap)
    nbr = defaultdict(list)
    for (a, b), recs in between.items():
        nbr[a].append((b, recs))
    memo: dict = {}

    def table(u: int, v: int):
        """Channel dict at (u, v), or None without a weak embedding."""
        if (u, v) in memo:
            return memo[(u, v)]
        if labels[v] != q.labels[u]:
            memo[(u, v)] = None
            return None
        chans = _channels_for(dag, u)
        vals = {ch: math.inf for ch in chans}
        for c, e2 in dag.children[u]:
            qe2 = q.edges[e2]
            best = {ch: -math.inf for ch in chans}
            any_edge = False
            for w, recs in nbr[v]:
                if labels[w] != q.labels[c]:
                    continue
                sub = table(c, w)
                if sub is None:
                    continue
                s_img, d_img = (v, w) if qe2.src == u else (w, v)
                for rec in recs:
                    if not _fits(rec, qe2, s_img, d_img, directed):
                        continue
                    any_edge = True
                    for e, s in chans:
                        x = sub.get((e, s), math.inf)
                        if s == 1 and q.precedes(e, e2):
                            x = min(x, rec[3])
                        elif s == -1 and q.precedes(e2, e):
                            x = min(x, -rec[3])
                        best[(e, s)] = max(best[(e, s)], x)
            if not any_edge:
                memo[(u, v)] = None
                return None
            for ch in chans:
                vals[ch] = min(vals[ch], best[ch])
        memo[(u, v)] = vals
        return vals

    out = {}
    for u in dag.order:
        if not dag.children[u]:
            continue
        for v, lab in labels.items():
            if lab != q.labels[u]:
                continue
            row = table(u, v)
            for e, s in _channels_for(dag, u):
                out[(u, v, e, s)] = -math.inf if row is None else row[(e, s)]
    return out


def weak_embedding_sites(snap: Snapshot, dag: QueryDag, directed: bool = False) -> set[tuple]:
    """``(u, v)`` pairs, ``u`` non-leaf, where the path tree below ``u`` maps with ``u`` at ``v``."""
    q = dag.query
    labels = dict(snap.labels)
    between = _edge_lists(snap)
    memo: dict = {}

    def ok(u: int, v: int) -> bool:
        if (u, v) not in memo:
            memo[(u, v)] = labels[v] == q.labels[u] and all(
                any(
                    w != v
                    and _fits(rec, q.edges[e2], *((v, w) if q.edges[e2].src == u else (w, v)), directed)
                    and ok(c, w)
                    for (a, w), recs in between.items()
                    if a == v
                    for rec in recs
                )
                for c, e2 in dag.children[u]
            )
        return memo[(u, v)]

    return {(u, v) for u in dag.order if dag.children[u] for v in labels if ok(u, v)}


def matchable_reference(snap: Snapshot, dag: QueryDag, directed: bool = False) -> set[tuple]:
    """Keys ``(eid, seq, img_src)`` that pass the bound test under ``maxmin_reference``."""
    q = dag.query
    labels = dict(snap.labels)
    ref = maxmin_reference(snap, dag, directed)
    out = set()
    for rec in snap.edges:
        src, dst, label, t, seq = rec
        if src == dst:
            continue
        for eid in q.edge_ids:
            qe = q.edges[eid]
            if qe.label != label:
                continue
            anchorings = [(src, dst)] if directed else [(src, dst), (dst, src)]
            for a, b in anchorings:
                if labels[a] != q.labels[qe.src] or labels[b] != q.labels[qe.dst]:
                    continue
                p, c = dag.orientation[eid]
                y = b if c == qe.dst else a
                if dag.children[c]:
                    hi = ref[(c, y, eid, 1)]
                    lo = -ref[(c, y, eid, -1)]
                    if not lo < t < hi:
                        continue
                out.add((eid, seq, a))
    return out


def snapshot_diff(before: Iterable, after: Iterable) -> tuple[set, set]:
    before, after = set(before), set(after)
    return after - before, before - after
