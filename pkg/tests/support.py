"""Shared fixtures data and the random instance family used by the suites."""

from __future__ import annotations

import random
from typing import NamedTuple

from tcmatch.graph import Snapshot
from tcmatch.oracle import embedding_key
from tcmatch.query import TemporalQuery
from tcmatch.workload import WalkError, generate_query, synth_edges

# Running example: five query vertices, six edges, seven data vertices.
RUNNING_QUERY_VERTICES = {1: "A", 2: "B", 3: "C", 4: "D", 5: "E"}
RUNNING_QUERY_EDGES = [(1, 1, 2), (2, 1, 3), (3, 2, 4), (4, 3, 4), (5, 4, 5), (6, 3, 5)]
RUNNING_ORDER = [(1, 3), (1, 5), (2, 4), (2, 5), (4, 6)]
RUNNING_VERTICES = {1: "A", 2: "B", 3: "C", 4: "C", 5: "D", 6: "E", 7: "E"}
# edge i (1-based) arrives at time i
RUNNING_EDGES = [
    (1, 2), (3, 5), (3, 5), (1, 3), (3, 6), (1, 2), (4, 7),
    (1, 4), (5, 6), (5, 7), (2, 5), (1, 4), (4, 5), (4, 7),
]
RUNNING_WINDOW = 10


def running_query() -> TemporalQuery:
    return TemporalQuery(RUNNING_QUERY_VERTICES, RUNNING_QUERY_EDGES, RUNNING_ORDER)


def running_stream(upto: int | None = None) -> list[tuple]:
    """``(src, dst, label, ts)`` arrivals, optionally truncated after time ``upto``."""
    out = [(a, b, None, i) for i, (a, b) in enumerate(RUNNING_EDGES, start=1)]
    return out if upto is None else out[:upto]


# Pruning example: every query vertex except u3 has a single image; u3 can
# sit at v3 (two embeddings) or v9 (the ordered pair e3 < e4 fails there).
PRUNING_QUERY_VERTICES = {1: "A", 2: "B", 3: "C", 4: "D", 5: "E", 6: "F", 7: "G", 8: "H"}
PRUNING_QUERY_EDGES = [
    (1, 1, 2), (2, 2, 3), (3, 3, 4), (4, 4, 5), (5, 3, 6), (6, 3, 7), (7, 6, 8),
]
PRUNING_ORDER = [(3, 4), (5, 2), (2, 6)]
PRUNING_VERTICES = {1: "A", 2: "B", 3: "C", 9: "C", 4: "D", 5: "E", 6: "F", 7: "G", 8: "H"}
PRUNING_EDGES = {
    1: (9, 7), 2: (3, 4), 3: (4, 5), 4: (4, 5), 5: (3, 4), 6: (3, 4), 7: (3, 6), 8: (2, 3),
    9: (3, 7), 10: (2, 9), 11: (2, 9), 12: (9, 4), 13: (9, 6), 14: (6, 8), 15: (1, 2),
}


def pruning_query() -> TemporalQuery:
    return TemporalQuery(PRUNING_QUERY_VERTICES, PRUNING_QUERY_EDGES, PRUNING_ORDER)


def pruning_stream() -> list[tuple]:
    return [(a, b, None, t) for t, (a, b) in sorted(PRUNING_EDGES.items())]


# -- random instance family ---------------------------------------------------

MAX_ACTIVE = 40
DENSITIES = (0.0, 0.5, 1.0)


class Instance(NamedTuple):
    seed: int
    vertices: dict
    edges: list  # (src, dst, label, ts)
    query: TemporalQuery
    window: int
    directed: bool
    density: float
    witness: tuple  # canonical key of the embedding the query was walked from


def max_active(edges, window: int) -> int:
    best = 0
    lo = 0
    for hi, e in enumerate(edges):
        while edges[lo][3] + window <= e[3]:
            lo += 1
        best = max(best, hi - lo + 1)
    return best


def family_instance(seed: int, density: float | None = None, size: int | None = None) -> Instance:
    """Small random stream plus a query walked inside one window of it."""
    rng = random.Random(seed)
    n_vertices = rng.randint(6, 12)
    n_edges = rng.randint(30, 50)
    labels = rng.randint(2, 8)
    rate = rng.choice((0, 1, 2, 3))
    window = rng.randint(10, 30)
    directed = seed % 4 == 3
    if density is None:
        density = DENSITIES[seed % 3]
    if size is None:
        size = rng.randint(3, 6)
    vlabels, raw = synth_edges(n_vertices, n_edges, labels, rate, seed)
    edges = [(a, b, None, t) for a, b, t in raw]
    while max_active(edges, window) > MAX_ACTIVE:
        window -= 1
    for attempt in range(20):
        end = edges[rng.randrange(len(edges))][3]
        alive = [(i, e) for i, e in enumerate(edges) if end - window < e[3] <= end]
        snap = Snapshot(
            tuple(sorted(vlabels.items())),
            tuple((e[0], e[1], e[2], e[3], i) for i, e in alive),
        )
        try:
            query, witness = generate_query(snap, size, density, rng.randrange(1 << 30), max_walks=20)
        except WalkError:
            continue
        vmap = {}
        for eid, rec in witness.items():
            qe = query.edges[eid]
            vmap[qe.src], vmap[qe.dst] = rec[0], rec[1]
        key = embedding_key(vmap, {eid: rec[4] for eid, rec in witness.items()})
        return Instance(seed, vlabels, edges, query, window, directed, density, key)
    raise WalkError(f"seed {seed}: no query found")


# -- configuration comparison -------------------------------------------------

CONFIGS = {
    "default": {},
    "no-prune": {"disable_pruning": True},
    "no-filter": {"disable_filter": True},
    "naive": {"disable_pruning": True, "disable_filter": True},
}


def lockstep(ins: Instance, configs: dict = CONFIGS):
    """Run one engine per configuration side by side and compare every batch of reports.

    Returns ``(differing batches, {config: search_nodes_visited})``. A batch
    is everything fired by one ``push`` (or the final drain).
    """
    from tcmatch.engine import StreamEngine
    from tcmatch.matcher import MatchOptions

    vids = sorted(ins.query.vertex_ids)
    eids = sorted(ins.query.edge_ids)
    batches: dict[str, list] = {name: [] for name in configs}
    engines = {}
    for name, flags in configs.items():
        bucket = batches[name]

        def sink(rep, bucket=bucket):
            vm, em = rep.embedding.vmap, rep.embedding.emap
            bucket.append(
                (
                    rep.fire_time,
                    rep.polarity,
                    tuple(vm[u] for u in vids),
                    tuple(em[e].seq for e in eids),
                )
            )

        engines[name] = StreamEngine(
            ins.query, ins.window, ins.vertices, directed=ins.directed,
            options=MatchOptions(**flags), sink=sink,
        )
    diffs = 0

    def compare():
        nonlocal diffs
        ref = None
        for name in configs:
            got = batches[name]
            got.sort()
            if ref is None:
                ref = got
            elif got != ref:
                diffs += 1
        for name in configs:
            batches[name].clear()

    for src, dst, label, ts in ins.edges:
        for eng in engines.values():
            eng.push(src, dst, ts, label)
        compare()
    for eng in engines.values():
        eng.finish()
    compare()
    return diffs, {name: eng.summary()["search_nodes_visited"] for name, eng in engines.items()}
