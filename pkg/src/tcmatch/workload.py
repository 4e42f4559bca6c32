"""Synthetic streams and random-walk queries with controlled temporal density."""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction
from typing import Sequence

from .graph import Snapshot
from .query import QueryEdge, TemporalOrder, TemporalQuery

__all__ = [
    "WalkError",
    "label_alphabet",
    "synth_edges",
    "synth_stream",
    "random_walk_query",
    "eligible_pairs",
    "impose_order",
    "generate_query",
    "parallel_multiplicity",
]


class WalkError(RuntimeError):
    """No query of the requested shape could be drawn."""


def label_alphabet(count: int) -> list[str]:
    if count <= 26:
        return [chr(ord("A") + i) for i in range(count)]
    return [f"L{i}" for i in range(count)]


def synth_edges(
    n_vertices: int,
    n_edges: int,
    label_count: int,
    parallel_edge_rate: float = 0.0,
    rng_seed: int = 0,
    recent: int = 64,
) -> tuple[dict[int, str], list[tuple[int, int, int]]]:
    """Vertex labels and a time-ordered ``(src, dst, ts)`` list.

    With probability ``r / (1 + r)`` an edge reuses one of the last
    ``recent`` vertex pairs, so ``r`` is roughly the expected number of
    extra parallels per fresh pair.
    """
    if n_vertices < 2 or label_count < 1:
        raise ValueError("need at least two vertices and one label")
    rng = random.Random(rng_seed)
    alphabet = label_alphabet(label_count)
    labels = {v: rng.choice(alphabet) for v in range(n_vertices)}
    reuse = parallel_edge_rate / (1.0 + parallel_edge_rate) if parallel_edge_rate > 0 else 0.0
    pairs: deque[tuple[int, int]] = deque(maxlen=recent)
    edges = []
    ts = 0
    for _ in range(n_edges):
        ts += rng.choice((0, 1, 1, 2))
        if pairs and rng.random() < reuse:
            a, b = rng.choice(pairs)
        else:
            a, b = rng.sample(range(n_vertices), 2)
            pairs.append((a, b))
        edges.append((a, b, ts))
    return labels, edges


def synth_stream(
    n_vertices: int,
    n_edges: int,
    label_count: int,
    parallel_edge_rate: float = 0.0,
    rng_seed: int = 0,
) -> str:
    """Stream file text for :func:`synth_edges` output."""
    from .io import format_stream

    labels, edges = synth_edges(n_vertices, n_edges, label_count, parallel_edge_rate, rng_seed)
    return format_stream(labels, [(a, b, None, t) for a, b, t in edges])


def random_walk_query(snapshot: Snapshot, size: int, rng_seed: int = 0, max_tries: int = 50):
    """Walk the snapshot and turn the visited edges into a connected query.

    Returns ``(query, witness)`` where ``witness`` maps each query edge id to
    the ``(src, dst, label, ts, seq)`` record it was copied from. Query
    vertices are numbered in visiting order; the order is left empty.
    """
    if size < 1:
        raise ValueError("size must be positive")
    labels = dict(snapshot.labels)
    incident: dict[int, list[tuple]] = {}
    for rec in snapshot.edges:
        if rec[0] == rec[1]:
            continue
        incident.setdefault(rec[0], []).append(rec)
        incident.setdefault(rec[1], []).append(rec)
    starts = sorted(incident)
    if not starts:
        raise WalkError("snapshot has no usable edges")
    rng = random.Random(rng_seed)
    for _ in range(max_tries):
        qid: dict[int, int] = {}
        taken: set[int] = set()
        chosen: list[tuple] = []
        cur = rng.choice(starts)
        qid[cur] = 0
        while len(chosen) < size:
            free = [r for r in incident[cur] if r[4] not in taken]
            if not free:
                # restart from a visited vertex that still has unused edges
                spots = [v for v in qid if any(r[4] not in taken for r in incident[v])]
                if not spots:
                    break
                cur = rng.choice(sorted(spots))
                continue
            rec = rng.choice(free)
            taken.add(rec[4])
            chosen.append(rec)
            nxt = rec[1] if rec[0] == cur else rec[0]
            if nxt not in qid:
                qid[nxt] = len(qid)
            cur = nxt
        if len(chosen) == size:
            vertices = {qid[v]: labels[v] for v in qid}
            edges = [QueryEdge(i, qid[r[0]], qid[r[1]], r[2]) for i, r in enumerate(chosen)]
            witness = {i: r for i, r in enumerate(chosen)}
            return TemporalQuery(vertices, edges), witness
    raise WalkError(f"could not walk {size} edges after {max_tries} tries")


def _density(count: int, m: int) -> Fraction:
    return Fraction(count, m * (m - 1) // 2) if m > 1 else Fraction(0)


def eligible_pairs(permutation: Sequence[int], witness_ts: dict[int, int]) -> set[tuple[int, int]]:
    """Pairs ``(a, b)`` with ``a`` first in ``permutation`` and a strictly smaller witness timestamp."""
    at = {e: i for i, e in enumerate(permutation)}
    return {
        (a, b)
        for a in permutation
        for b in permutation
        if at[a] < at[b] and witness_ts[a] < witness_ts[b]
    }


def impose_order(
    query: TemporalQuery,
    witness_ts: dict[int, int],
    density: float,
    rng_seed: int = 0,
    permutation_tries: int = 200,
) -> TemporalOrder:
    """Draw a temporal order close to ``density`` that the witness satisfies.

    A pair ``(e, e')`` is eligible when ``e`` comes first in a random
    permutation and its witness timestamp is strictly smaller. Eligible sets
    are closed under transitivity; covering pairs are then dropped one at a
    time until the density is as close to the target as it gets.
    """
    if not 0 <= density <= 1:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    ids = list(query.edge_ids)
    m = len(ids)
    if density == 0 or m < 2:
        return TemporalOrder(ids)
    if density == 1:
        stamps = [witness_ts[e] for e in ids]
        if len(set(stamps)) != m:
            raise WalkError("witness timestamps collide; a total order is impossible")
        chain = sorted(ids, key=lambda e: witness_ts[e])
        return TemporalOrder(ids, list(zip(chain, chain[1:])))
    rng = random.Random(rng_seed)
    target = Fraction(density).limit_denominator(1000)
    best: set | None = None
    for _ in range(permutation_tries):
        perm = ids[:]
        rng.shuffle(perm)
        pairs = eligible_pairs(perm, witness_ts)
        if best is None or len(pairs) > len(best):
            best = pairs
        if _density(len(best), m) >= target:
            break
    pairs = set(best)
    while pairs:
        here = abs(_density(len(pairs), m) - target)
        there = abs(_density(len(pairs) - 1, m) - target)
        if there >= here:
            break
        covering = sorted(
            (a, b)
            for a, b in pairs
            if not any((a, c) in pairs and (c, b) in pairs for c in ids)
        )
        pairs.discard(rng.choice(covering))
    return TemporalOrder(ids, sorted(pairs))


def generate_query(
    snapshot: Snapshot,
    size: int,
    density: float,
    rng_seed: int = 0,
    max_walks: int = 50,
):
    """Random-walk query plus an order at ``density``; re-walks on timestamp ties."""
    rng = random.Random(rng_seed)
    last = None
    for _ in range(max_walks):
        seed = rng.randrange(1 << 30)
        query, witness = random_walk_query(snapshot, size, seed)
        try:
            order = impose_order(query, {e: r[3] for e, r in witness.items()}, density, seed)
        except WalkError as exc:
            last = exc
            continue
        return query.with_order(order.pairs()), witness
    raise WalkError(f"no usable walk after {max_walks} attempts: {last}")


def parallel_multiplicity(edges: Sequence[tuple]) -> float:
    """Mean number of edges per distinct unordered vertex pair."""
    pairs = {frozenset((e[0], e[1])) for e in edges}
    return len(edges) / len(pairs) if pairs else 0.0
